//! Multilinear forms as dense d-way coefficient arrays, and polynomial
//! functions over prime fields.
//!
//! A form `P: V₁ × … × V_d → 𝔽_q` with `dim V_i = n_i` is stored as the array
//! `c[i₁, …, i_d]` in row-major order (last index fastest), so that
//! `P(v₁, …, v_d) = Σ c[i₁…i_d]·v₁[i₁]⋯v_d[i_d]`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gfq::{Embedding, FieldCtx, FieldElem};
use crate::linalg::{Matrix, Subspace};

/// Largest coefficient array a form may hold.
pub const MAX_COEFFS: usize = 10_000_000;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultilinearForm {
    field: FieldCtx,
    dims: Vec<usize>,
    coeffs: Vec<FieldElem>,
}

fn checked_volume(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::Dimension("a form needs at least one slot".into()));
    }
    if dims.contains(&0) {
        return Err(Error::Dimension(format!("every slot dimension must be positive: {dims:?}")));
    }
    dims.iter()
        .try_fold(1usize, |acc, &n| acc.checked_mul(n))
        .filter(|&v| v <= MAX_COEFFS)
        .ok_or_else(|| Error::CapExceeded {
            what: "coefficient array",
            needed: dims.iter().map(|&n| n as u128).product(),
            cap: MAX_COEFFS as u128,
        })
}

/// Contracts slot `slot` of a row-major array with `v`.
fn contract_raw(
    field: &FieldCtx,
    coeffs: &[FieldElem],
    dims: &[usize],
    slot: usize,
    v: &[FieldElem],
) -> Vec<FieldElem> {
    let n = dims[slot];
    let outer: usize = dims[..slot].iter().product();
    let inner: usize = dims[slot + 1..].iter().product();
    let mut out = vec![FieldElem::ZERO; outer * inner];
    for o in 0..outer {
        for (i, &vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            let src = &coeffs[(o * n + i) * inner..(o * n + i + 1) * inner];
            let dst = &mut out[o * inner..(o + 1) * inner];
            for (d, &s) in dst.iter_mut().zip(src) {
                *d = field.mul_add(*d, vi, s);
            }
        }
    }
    out
}

impl MultilinearForm {
    pub fn new(field: FieldCtx, dims: Vec<usize>, coeffs: Vec<FieldElem>) -> Result<Self> {
        let volume = checked_volume(&dims)?;
        if coeffs.len() != volume {
            return Err(Error::Dimension(format!(
                "dims {dims:?} need {volume} coefficients, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|x| x.index() >= field.order()) {
            return Err(Error::InvalidInput(format!("coefficient out of range for {field:?}")));
        }
        Ok(Self {
            field,
            dims,
            coeffs,
        })
    }

    pub fn from_indices(field: &FieldCtx, dims: Vec<usize>, coeffs: &[u64]) -> Result<Self> {
        let coeffs = coeffs
            .iter()
            .map(|&x| field.elem(x))
            .collect::<Result<Vec<_>>>()?;
        Self::new(field.clone(), dims, coeffs)
    }

    pub fn zero(field: &FieldCtx, dims: Vec<usize>) -> Result<Self> {
        let volume = checked_volume(&dims)?;
        Self::new(field.clone(), dims, vec![FieldElem::ZERO; volume])
    }

    /// The `index`-th form in the enumeration of all forms with these dims:
    /// coefficients are the base-q digits of `index`, first coefficient least
    /// significant.
    pub fn from_enumeration_index(field: &FieldCtx, dims: Vec<usize>, index: u128) -> Result<Self> {
        let volume = checked_volume(&dims)?;
        let q = field.order() as u128;
        let mut rest = index;
        let coeffs = (0..volume)
            .map(|_| {
                let d = (rest % q) as u32;
                rest /= q;
                FieldElem(d)
            })
            .collect();
        if rest != 0 {
            return Err(Error::InvalidInput(format!("enumeration index {index} out of range")));
        }
        Self::new(field.clone(), dims, coeffs)
    }

    /// `c[i,…,i] = 1`, all other coefficients zero.
    pub fn diagonal(field: &FieldCtx, n: usize, d: usize) -> Result<Self> {
        let mut form = Self::zero(field, vec![n; d])?;
        let step: usize = (0..d).map(|k| n.pow(k as u32)).sum();
        for i in 0..n {
            form.coeffs[i * step] = FieldElem::ONE;
        }
        Ok(form)
    }

    /// Coefficients i.i.d. uniform from a ChaCha8 stream seeded with `seed`.
    pub fn random(field: &FieldCtx, dims: Vec<usize>, seed: u64) -> Result<Self> {
        let volume = checked_volume(&dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..volume).map(|_| field.random(&mut rng)).collect();
        Self::new(field.clone(), dims, coeffs)
    }

    /// The product `l₁(v₁)⋯l_d(v_d)` of linear forms.
    pub fn rank_one(field: &FieldCtx, linear_forms: &[Vec<FieldElem>]) -> Result<Self> {
        let dims: Vec<usize> = linear_forms.iter().map(Vec::len).collect();
        let mut coeffs = vec![FieldElem::ONE];
        for l in linear_forms {
            coeffs = coeffs
                .iter()
                .flat_map(|&a| l.iter().map(move |&b| (a, b)))
                .map(|(a, b)| field.mul(a, b))
                .collect();
        }
        Self::new(field.clone(), dims, coeffs)
    }

    /// A product of nonzero linear forms drawn from a ChaCha8 stream.
    pub fn random_rank_one(field: &FieldCtx, dims: Vec<usize>, seed: u64) -> Result<Self> {
        checked_volume(&dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let forms: Vec<Vec<FieldElem>> = dims
            .iter()
            .map(|&n| loop {
                let l: Vec<FieldElem> = (0..n).map(|_| field.random(&mut rng)).collect();
                if n == 0 || l.iter().any(|x| !x.is_zero()) {
                    break l;
                }
            })
            .collect();
        Self::rank_one(field, &forms)
    }

    /// The bilinear form `(x, y) ↦ xᵀ M y`.
    pub fn from_matrix(m: &Matrix) -> Result<Self> {
        Self::new(m.field().clone(), vec![m.rows(), m.cols()], m.data().to_vec())
    }

    #[inline]
    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn arity(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn coeffs(&self) -> &[FieldElem] {
        &self.coeffs
    }

    pub fn indices(&self) -> Vec<u64> {
        self.coeffs.iter().map(|x| x.index() as u64).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|x| x.is_zero())
    }

    pub fn coeff(&self, idx: &[usize]) -> FieldElem {
        let flat = idx
            .iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i);
        self.coeffs[flat]
    }

    fn check_vector(&self, slot: usize, len: usize) -> Result<()> {
        if slot >= self.arity() {
            return Err(Error::Dimension(format!(
                "slot {slot} out of range for arity {}",
                self.arity()
            )));
        }
        if len != self.dims[slot] {
            return Err(Error::Dimension(format!(
                "slot {slot} expects length {}, got {len}",
                self.dims[slot]
            )));
        }
        Ok(())
    }

    pub fn eval<V: AsRef<[FieldElem]>>(&self, vectors: &[V]) -> Result<FieldElem> {
        if vectors.len() != self.arity() {
            return Err(Error::Dimension(format!(
                "expected {} vectors, got {}",
                self.arity(),
                vectors.len()
            )));
        }
        for (slot, v) in vectors.iter().enumerate() {
            self.check_vector(slot, v.as_ref().len())?;
        }
        let mut coeffs = self.coeffs.clone();
        let mut dims = self.dims.clone();
        for slot in (0..self.arity()).rev() {
            coeffs = contract_raw(&self.field, &coeffs, &dims, slot, vectors[slot].as_ref());
            dims.pop();
        }
        Ok(coeffs[0])
    }

    /// `(v₁…) ↦ P(…, v, …)` with `v` fixed in `slot`; arity drops by one.
    pub fn contract(&self, slot: usize, v: &[FieldElem]) -> Result<MultilinearForm> {
        self.check_vector(slot, v.len())?;
        if self.arity() < 2 {
            return Err(Error::Dimension("cannot contract a form of arity 1".into()));
        }
        let coeffs = contract_raw(&self.field, &self.coeffs, &self.dims, slot, v);
        let mut dims = self.dims.clone();
        dims.remove(slot);
        Ok(MultilinearForm {
            field: self.field.clone(),
            dims,
            coeffs,
        })
    }

    /// Matrix with rows indexed by the basis of `slot` and columns by the
    /// row-major multi-index of the remaining slots.
    pub fn flatten(&self, slot: usize) -> Result<Matrix> {
        if slot >= self.arity() {
            return Err(Error::Dimension(format!("slot {slot} out of range")));
        }
        let moved = self.move_slot_to_front(slot)?;
        let rows = self.dims[slot];
        Matrix::new(self.field.clone(), rows, self.coeffs.len() / rows, moved.coeffs)
    }

    /// Reorders slots so that new slot `k` is old slot `perm[k]`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<MultilinearForm> {
        let d = self.arity();
        let mut seen = vec![false; d];
        if perm.len() != d || perm.iter().any(|&s| s >= d || std::mem::replace(&mut seen[s], true)) {
            return Err(Error::InvalidInput(format!("{perm:?} is not a permutation of {d} slots")));
        }
        let dims: Vec<usize> = perm.iter().map(|&s| self.dims[s]).collect();
        let mut old_strides = vec![1usize; d];
        for k in (0..d.saturating_sub(1)).rev() {
            old_strides[k] = old_strides[k + 1] * self.dims[k + 1];
        }
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        let mut idx = vec![0usize; d];
        for _ in 0..self.coeffs.len() {
            let src: usize = (0..d).map(|k| idx[k] * old_strides[perm[k]]).sum();
            coeffs.push(self.coeffs[src]);
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < dims[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(MultilinearForm {
            field: self.field.clone(),
            dims,
            coeffs,
        })
    }

    pub fn move_slot_to_front(&self, slot: usize) -> Result<MultilinearForm> {
        let mut perm: Vec<usize> = (0..self.arity()).filter(|&s| s != slot).collect();
        perm.insert(0, slot);
        self.permute_slots(&perm)
    }

    /// Precomposes slot `slot` with `mᵀ`: new coefficients are
    /// `c'[…, a, …] = Σ_i m[a, i]·c[…, i, …]`. With `m` the basis of a
    /// subspace this is the restriction to that subspace; with `m` invertible
    /// it is a change of basis.
    pub fn change_basis(&self, slot: usize, m: &Matrix) -> Result<MultilinearForm> {
        if slot >= self.arity() || m.cols() != self.dims[slot] {
            return Err(Error::Dimension(format!(
                "{}x{} matrix cannot act on slot {slot} of {:?}",
                m.rows(),
                m.cols(),
                self.dims
            )));
        }
        if m.rows() == 0 {
            // Restriction to the zero subspace of a slot leaves nothing.
            let mut dims = self.dims.clone();
            dims[slot] = 0;
            return Ok(MultilinearForm {
                field: self.field.clone(),
                dims,
                coeffs: Vec::new(),
            });
        }
        let f = &self.field;
        let n = self.dims[slot];
        let k = m.rows();
        let outer: usize = self.dims[..slot].iter().product();
        let inner: usize = self.dims[slot + 1..].iter().product();
        let mut coeffs = vec![FieldElem::ZERO; outer * k * inner];
        for o in 0..outer {
            for a in 0..k {
                let dst_start = (o * k + a) * inner;
                for i in 0..n {
                    let w = m[(a, i)];
                    if w.is_zero() {
                        continue;
                    }
                    let src_start = (o * n + i) * inner;
                    for t in 0..inner {
                        coeffs[dst_start + t] =
                            f.mul_add(coeffs[dst_start + t], w, self.coeffs[src_start + t]);
                    }
                }
            }
        }
        let mut dims = self.dims.clone();
        dims[slot] = k;
        Ok(MultilinearForm {
            field: self.field.clone(),
            dims,
            coeffs,
        })
    }

    /// Coefficients of `P` restricted to `W₁ × … × W_d` in the canonical bases.
    pub fn restrict(&self, subspaces: &[Subspace]) -> Result<MultilinearForm> {
        if subspaces.len() != self.arity() {
            return Err(Error::Dimension("one subspace per slot required".into()));
        }
        let mut out = self.clone();
        for (slot, w) in subspaces.iter().enumerate() {
            out = out.change_basis(slot, w.basis())?;
        }
        Ok(out)
    }

    /// Whether `P` vanishes identically on `W₁ × … × W_d`. By multilinearity
    /// it suffices to test basis tuples.
    pub fn vanishes_on(&self, subspaces: &[Subspace]) -> Result<bool> {
        Ok(self.restrict(subspaces)?.coeffs.iter().all(|x| x.is_zero()))
    }

    pub fn embed(&self, emb: &Embedding) -> MultilinearForm {
        MultilinearForm {
            field: emb.target().clone(),
            dims: self.dims.clone(),
            coeffs: self.coeffs.iter().map(|&x| emb.apply(x)).collect(),
        }
    }

    pub fn add(&self, other: &MultilinearForm) -> Result<MultilinearForm> {
        if self.field != other.field || self.dims != other.dims {
            return Err(Error::Dimension("forms differ in field or dims".into()));
        }
        let f = &self.field;
        Ok(MultilinearForm {
            field: f.clone(),
            dims: self.dims.clone(),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(&a, &b)| f.add(a, b))
                .collect(),
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    pub exps: Vec<u32>,
    pub coeff: FieldElem,
}

/// A polynomial function on 𝔽_p^n given by monomials with exponents below p.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolynomialFn {
    field: FieldCtx,
    n: usize,
    terms: Vec<Monomial>,
}

impl PolynomialFn {
    pub fn new(field: &FieldCtx, n: usize, terms: Vec<Monomial>) -> Result<Self> {
        if !field.is_prime_field() {
            return Err(Error::Unsupported(
                "polynomial functions are supported over prime fields only".into(),
            ));
        }
        for t in &terms {
            if t.exps.len() != n {
                return Err(Error::Dimension(format!(
                    "monomial has {} exponents, expected {n}",
                    t.exps.len()
                )));
            }
            if t.exps.iter().any(|&x| x >= field.p()) {
                return Err(Error::InvalidInput(format!(
                    "exponent vector {:?} has an entry ≥ p = {}",
                    t.exps,
                    field.p()
                )));
            }
            if t.coeff.index() >= field.order() {
                return Err(Error::InvalidInput("monomial coefficient out of range".into()));
            }
        }
        Ok(Self {
            field: field.clone(),
            n,
            terms,
        })
    }

    /// Random polynomial of degree exactly `d` (when `d ≥ 1`): every monomial
    /// of total degree ≤ d gets an i.i.d. uniform coefficient, and a top-degree
    /// monomial is forced nonzero if the draw left none.
    pub fn random(field: &FieldCtx, n: usize, d: u32, seed: u64) -> Result<Self> {
        let p = field.p();
        let mut exps_list = Vec::new();
        let mut exps = vec![0u32; n];
        loop {
            if exps.iter().sum::<u32>() <= d {
                exps_list.push(exps.clone());
            }
            let mut k = 0;
            loop {
                if k == n {
                    break;
                }
                exps[k] += 1;
                if exps[k] < p.min(d + 1) {
                    break;
                }
                exps[k] = 0;
                k += 1;
            }
            if k == n {
                break;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut terms: Vec<Monomial> = exps_list
            .into_iter()
            .map(|exps| Monomial {
                exps,
                coeff: field.random(&mut rng),
            })
            .collect();
        let has_top = terms
            .iter()
            .any(|t| !t.coeff.is_zero() && t.exps.iter().sum::<u32>() == d);
        if !has_top && d > 0 {
            if let Some(t) = terms.iter_mut().find(|t| t.exps.iter().sum::<u32>() == d) {
                t.coeff = FieldElem::ONE;
            }
        }
        terms.retain(|t| !t.coeff.is_zero());
        Self::new(field, n, terms)
    }

    pub fn field(&self) -> &FieldCtx {
        &self.field
    }

    pub fn num_vars(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn degree(&self) -> u32 {
        self.terms
            .iter()
            .filter(|t| !t.coeff.is_zero())
            .map(|t| t.exps.iter().sum())
            .max()
            .unwrap_or(0)
    }

    pub fn eval(&self, x: &[FieldElem]) -> Result<FieldElem> {
        if x.len() != self.n {
            return Err(Error::Dimension(format!(
                "expected {} variables, got {}",
                self.n,
                x.len()
            )));
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked(&self, x: &[FieldElem]) -> FieldElem {
        let f = &self.field;
        self.terms.iter().fold(FieldElem::ZERO, |acc, t| {
            let m = t
                .exps
                .iter()
                .zip(x)
                .fold(t.coeff, |m, (&k, &xi)| f.mul(m, f.pow(xi, k as u64)));
            f.add(acc, m)
        })
    }

    /// The symmetric multilinear form obtained by iterated differencing:
    /// `Q̃(h₁,…,h_d) = Σ_{S ⊆ [d]} (−1)^{d−|S|} Q(Σ_{i∈S} h_i)`.
    ///
    /// Requires `deg Q ≤ d < p`.
    pub fn polarize(&self, d: usize) -> Result<MultilinearForm> {
        let p = self.field.p() as usize;
        if d >= p {
            return Err(Error::Unsupported(format!(
                "polarization needs degree below the characteristic (d = {d}, p = {p})"
            )));
        }
        if d == 0 {
            return Err(Error::InvalidInput("polarization degree must be positive".into()));
        }
        if self.degree() as usize > d {
            return Err(Error::InvalidInput(format!(
                "polynomial has degree {} > {d}",
                self.degree()
            )));
        }
        let f = &self.field;
        let n = self.n;
        let dims = vec![n; d];
        let volume = checked_volume(&dims)?;
        let mut coeffs = Vec::with_capacity(volume);
        let mut idx = vec![0usize; d];
        let mut point = vec![FieldElem::ZERO; n];
        for _ in 0..volume {
            let mut acc = FieldElem::ZERO;
            for subset in 0u32..(1 << d) {
                point.fill(FieldElem::ZERO);
                for (k, &i) in idx.iter().enumerate() {
                    if subset >> k & 1 == 1 {
                        point[i] = f.add(point[i], FieldElem::ONE);
                    }
                }
                let v = self.eval_unchecked(&point);
                if (d - subset.count_ones() as usize).is_multiple_of(2) {
                    acc = f.add(acc, v);
                } else {
                    acc = f.sub(acc, v);
                }
            }
            coeffs.push(acc);
            for k in (0..d).rev() {
                idx[k] += 1;
                if idx[k] < n {
                    break;
                }
                idx[k] = 0;
            }
        }
        MultilinearForm::new(f.clone(), dims, coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn gf(q: u64) -> FieldCtx {
        FieldCtx::with_order(q).unwrap()
    }

    fn random_vec(f: &FieldCtx, n: usize, rng: &mut ChaCha8Rng) -> Vec<FieldElem> {
        (0..n).map(|_| f.random(rng)).collect()
    }

    /// Independent oracle: sum every monomial term explicitly.
    fn monomial_sum(p: &MultilinearForm, vs: &[Vec<FieldElem>]) -> FieldElem {
        let f = p.field();
        let d = p.arity();
        let mut total = FieldElem::ZERO;
        let mut idx = vec![0usize; d];
        loop {
            let mut term = p.coeff(&idx);
            for k in 0..d {
                term = f.mul(term, vs[k][idx[k]]);
            }
            total = f.add(total, term);
            let mut k = d;
            loop {
                if k == 0 {
                    return total;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < p.dims()[k] {
                    break;
                }
                idx[k] = 0;
            }
        }
    }

    #[test]
    fn eval_examples() {
        let f2 = gf(2);
        let z = MultilinearForm::zero(&f2, vec![2, 3, 2]).unwrap();
        let one = |n| vec![FieldElem::ONE; n];
        assert_eq!(z.eval(&[one(2), one(3), one(2)]).unwrap(), FieldElem::ZERO);
        let diag = MultilinearForm::diagonal(&f2, 1, 3).unwrap();
        assert_eq!(diag.eval(&[one(1), one(1), one(1)]).unwrap(), FieldElem::ONE);
        assert!(z.eval(&[one(2), one(2), one(2)]).is_err());
    }

    #[test]
    fn eval_matches_monomial_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for q in [2, 3, 4, 5, 9] {
            let f = gf(q);
            for s in 0..10 {
                let dims = vec![2, 3, 2];
                let p = MultilinearForm::random(&f, dims.clone(), s).unwrap();
                let vs: Vec<_> = dims.iter().map(|&n| random_vec(&f, n, &mut rng)).collect();
                assert_eq!(p.eval(&vs).unwrap(), monomial_sum(&p, &vs));
            }
        }
    }

    #[test]
    fn contract_examples() {
        let f2 = gf(2);
        let p = MultilinearForm::random(&f2, vec![2, 2, 2], 3).unwrap();
        let c = p.contract(0, &[FieldElem::ZERO; 2]).unwrap();
        assert!(c.is_zero());
        assert_eq!(c.dims(), &[2, 2]);

        let f3 = gf(3);
        let m = Matrix::from_indices(&f3, 2, 3, &[1, 2, 0, 0, 1, 1]).unwrap();
        let y = vec![FieldElem(1), FieldElem(2), FieldElem(1)];
        let lin = MultilinearForm::from_matrix(&m).unwrap().contract(1, &y).unwrap();
        assert_eq!(lin.coeffs(), m.mul_vec(&y).unwrap().as_slice());

        // Diagonal trilinear n=2 with e₁ in slot 3: c'[i,j] = c[i,j,0] = δ_{i0}δ_{j0}.
        let diag = MultilinearForm::diagonal(&f2, 2, 3).unwrap();
        let c = diag.contract(2, &[FieldElem::ONE, FieldElem::ZERO]).unwrap();
        assert_eq!(c.indices(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn contract_agrees_with_eval() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = gf(5);
        for s in 0..20 {
            let p = MultilinearForm::random(&f, vec![3, 2, 2], s).unwrap();
            let slot = rng.gen_range(0..3);
            let v = random_vec(&f, p.dims()[slot], &mut rng);
            let c = p.contract(slot, &v).unwrap();
            let mut vs: Vec<_> = p.dims().iter().map(|&n| random_vec(&f, n, &mut rng)).collect();
            vs[slot] = v;
            let mut rest = vs.clone();
            rest.remove(slot);
            assert_eq!(c.eval(&rest).unwrap(), p.eval(&vs).unwrap());
        }
    }

    #[test]
    fn flatten_and_contract_are_consistent() {
        let f = gf(3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for s in 0..10 {
            let p = MultilinearForm::random(&f, vec![3, 2, 4], s).unwrap();
            let flat = p.flatten(0).unwrap();
            assert_eq!(flat.shape(), (3, 8));
            let v = random_vec(&f, 3, &mut rng);
            let vt = Matrix::new(f.clone(), 1, 3, v.clone()).unwrap();
            assert_eq!(vt.mul(&flat).unwrap().data(), p.contract(0, &v).unwrap().coeffs());
        }
        let m = Matrix::from_indices(&f, 2, 2, &[1, 2, 0, 1]).unwrap();
        assert_eq!(MultilinearForm::from_matrix(&m).unwrap().flatten(0).unwrap(), m);
        assert!(MultilinearForm::zero(&f, vec![2, 2, 2]).unwrap().flatten(1).unwrap().is_zero());
    }

    #[test]
    fn generators() {
        let f2 = gf(2);
        let diag = MultilinearForm::diagonal(&f2, 2, 3).unwrap();
        assert_eq!(diag.coeffs().iter().filter(|x| !x.is_zero()).count(), 2);
        assert_eq!(diag.coeff(&[1, 1, 1]), FieldElem::ONE);
        let r1 = MultilinearForm::rank_one(
            &f2,
            &[vec![FieldElem(1), FieldElem(0)], vec![FieldElem(1), FieldElem(1)]],
        )
        .unwrap();
        assert!(!r1.is_zero());
        assert_eq!(r1.indices(), vec![1, 1, 0, 0]);
        let a = MultilinearForm::random(&gf(7), vec![3, 3, 3], 99).unwrap();
        let b = MultilinearForm::random(&gf(7), vec![3, 3, 3], 99).unwrap();
        assert_eq!(a, b);
        let all: Vec<_> = (0..256)
            .map(|i| MultilinearForm::from_enumeration_index(&f2, vec![2, 2, 2], i).unwrap())
            .collect();
        assert_eq!(all.iter().collect::<std::collections::HashSet<_>>().len(), 256);
        assert!(MultilinearForm::from_enumeration_index(&f2, vec![2, 2, 2], 256).is_err());
    }

    #[test]
    fn flatten_rank_is_invariant_under_other_slot_basis_changes() {
        let f = gf(3);
        for s in 0..20 {
            let p = MultilinearForm::random(&f, vec![3, 3, 2], s).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + s);
            let data = (0..9).map(|_| f.random(&mut rng)).collect();
            let g = Matrix::new(f.clone(), 3, 3, data).unwrap();
            if g.rank() < 3 {
                continue;
            }
            let moved = p.change_basis(1, &g).unwrap();
            assert_eq!(p.flatten(0).unwrap().rank(), moved.flatten(0).unwrap().rank());
        }
    }

    #[test]
    fn permute_slots_round_trips() {
        let f = gf(3);
        let p = MultilinearForm::random(&f, vec![2, 3, 4], 1).unwrap();
        let q = p.permute_slots(&[2, 0, 1]).unwrap();
        assert_eq!(q.dims(), &[4, 2, 3]);
        assert_eq!(q.coeff(&[3, 1, 2]), p.coeff(&[1, 2, 3]));
        assert_eq!(q.permute_slots(&[1, 2, 0]).unwrap(), p);
        assert!(p.permute_slots(&[0, 0, 1]).is_err());
    }

    #[test]
    fn polarize_quadratic_over_f3() {
        let f3 = gf(3);
        let q = PolynomialFn::new(
            &f3,
            2,
            vec![Monomial {
                exps: vec![1, 1],
                coeff: FieldElem::ONE,
            }],
        )
        .unwrap();
        let qt = q.polarize(2).unwrap();
        // Oracle: h₁h'₂ + h₂h'₁, compared over all 81 pairs.
        for a in 0..9u32 {
            for b in 0..9u32 {
                let h = [FieldElem(a % 3), FieldElem(a / 3)];
                let hp = [FieldElem(b % 3), FieldElem(b / 3)];
                let expected = f3.add(f3.mul(h[0], hp[1]), f3.mul(h[1], hp[0]));
                assert_eq!(qt.eval(&[h.to_vec(), hp.to_vec()]).unwrap(), expected);
            }
        }
        let zero = PolynomialFn::new(&f3, 2, vec![]).unwrap();
        assert!(zero.polarize(2).unwrap().is_zero());
    }

    #[test]
    fn polarize_cubic_over_f5_is_symmetric() {
        let f5 = gf(5);
        let q = PolynomialFn::new(
            &f5,
            3,
            vec![Monomial {
                exps: vec![1, 1, 1],
                coeff: FieldElem::ONE,
            }],
        )
        .unwrap();
        let qt = q.polarize(3).unwrap();
        assert_eq!(qt.coeff(&[0, 1, 2]), FieldElem::ONE);
        for perm in [[0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]] {
            assert_eq!(qt.permute_slots(&perm).unwrap(), qt);
        }
    }

    #[test]
    fn polarize_rejects_low_characteristic() {
        let f3 = gf(3);
        let q = PolynomialFn::random(&f3, 2, 2, 1).unwrap();
        assert!(matches!(q.polarize(3), Err(Error::Unsupported(_))));
        assert!(PolynomialFn::new(&gf(4), 1, vec![]).is_err());
    }

    #[test]
    fn random_polynomials_hit_the_requested_degree() {
        for s in 0..30 {
            let q = PolynomialFn::random(&gf(5), 2, 3, s).unwrap();
            assert_eq!(q.degree(), 3);
            let q = PolynomialFn::random(&gf(3), 3, 2, s).unwrap();
            assert_eq!(q.degree(), 2);
        }
    }

    proptest! {
        #[test]
        fn eval_is_multilinear(seed in any::<u64>(), slot in 0usize..3) {
            let f = gf(4);
            let p = MultilinearForm::random(&f, vec![2, 3, 2], seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x55);
            let vs: Vec<_> = p.dims().iter().map(|&n| random_vec(&f, n, &mut rng)).collect();
            let u = random_vec(&f, p.dims()[slot], &mut rng);
            let s = f.random(&mut rng);
            let mut sum = vs.clone();
            sum[slot] = vs[slot].iter().zip(&u).map(|(&a, &b)| f.mul_add(a, s, b)).collect();
            let mut alt = vs.clone();
            alt[slot] = u;
            let lhs = p.eval(&sum).unwrap();
            let rhs = f.mul_add(p.eval(&vs).unwrap(), s, p.eval(&alt).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn polarization_is_symmetric(seed in any::<u64>()) {
            let q = PolynomialFn::random(&gf(5), 2, 3, seed).unwrap();
            let qt = q.polarize(3).unwrap();
            for perm in [[0, 2, 1], [1, 0, 2], [2, 1, 0]] {
                prop_assert_eq!(&qt.permute_slots(&perm).unwrap(), &qt);
            }
        }
    }
}
