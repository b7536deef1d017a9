//! Rank computations for multilinear forms.
//!
//! * the zero set `Z_P = {(v₂,…,v_d) : P(·, v₂,…,v_d) ≡ 0}` counted over
//!   𝔽_{q^e},
//! * the analytic rank, once from `|Z_P(𝔽_q)|` and once from a direct
//!   character sum over the whole domain,
//! * the slice rank as a minimum of codimension sums over subspace tuples on
//!   which the form vanishes, searched exhaustively,
//! * the subspace rank of a space of bilinear forms and its generic max rank,
//! * a heuristic estimate of `codim Z_P` from point counts over extensions.

use std::collections::HashMap;
use std::rc::Rc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::MultilinearForm;
use crate::gfq::{FieldCtx, FieldElem};
use crate::linalg::{self, Matrix, Subspace, DEFAULT_SUBSPACE_CAP};

/// Absolute tolerance for every real-valued comparison.
pub const TOLERANCE: f64 = 1e-9;
pub const DEFAULT_POINT_CAP: u64 = 1 << 34;
pub const DEFAULT_SEARCH_BUDGET: u64 = 10_000_000;

/// Enumeration budgets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Caps {
    /// Points enumerated by zero-set counts and character sums.
    pub points: u64,
    /// Subspaces yielded by any single Grassmannian enumeration.
    pub subspaces: u64,
    /// Subspace tuples tested by a vanishing search.
    pub search: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Self {
            points: DEFAULT_POINT_CAP,
            subspaces: DEFAULT_SUBSPACE_CAP,
            search: DEFAULT_SEARCH_BUDGET,
        }
    }
}

fn checked_points(q: u64, exponent: usize, cap: u64, what: &'static str) -> Result<u64> {
    let needed = (q as u128).checked_pow(exponent as u32);
    match needed {
        Some(n) if n <= cap as u128 => Ok(n as u64),
        _ => Err(Error::CapExceeded {
            what,
            needed: needed.unwrap_or(u128::MAX),
            cap: cap as u128,
        }),
    }
}

/// `k` with `q^k = n`, if `n` is an exact power of `q`.
fn exact_log(n: u64, q: u64) -> Option<u32> {
    let mut k = 0;
    let mut acc = 1u64;
    while acc < n {
        acc = acc.checked_mul(q)?;
        k += 1;
    }
    (acc == n).then_some(k)
}

fn log_base(n: u64, q: u64) -> f64 {
    match exact_log(n, q) {
        Some(k) => k as f64,
        None => (n as f64).ln() / (q as f64).ln(),
    }
}

/// Decodes `index` into `len` base-`q` digits, first digit least significant.
fn decode_vector(mut index: u64, q: u64, len: usize, out: &mut [FieldElem]) {
    for x in out.iter_mut().take(len) {
        *x = FieldElem((index % q) as u32);
        index /= q;
    }
}

/// `|Z_P(𝔽_{q^e})|`, the number of tuples `(v₂,…,v_d)` over the extension
/// for which the slot-1 contraction is the zero functional.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroSetCount {
    pub count: u64,
    pub extension_degree: u32,
    /// `Σ_{i≥2} n_i`.
    pub ambient: usize,
}

/// Counts `Z_P(𝔽_{q^e})`. Slots 2..d−1 are enumerated; for each such tuple the
/// remaining condition is linear in `v_d`, so its solutions are counted as a
/// kernel size.
pub fn zero_set_count(p: &MultilinearForm, e: u32, caps: &Caps) -> Result<ZeroSetCount> {
    let dims = p.dims();
    let d = dims.len();
    let ambient: usize = dims[1..].iter().sum();
    let emb = p.field().extension(e)?;
    let big = emb.target().clone();
    let q = big.order() as u64;
    checked_points(q, ambient, caps.points, "zero-set enumeration")?;

    if d == 1 {
        return Ok(ZeroSetCount {
            count: p.is_zero() as u64,
            extension_degree: e,
            ambient,
        });
    }
    let pe = p.embed(&emb);
    let n_last = dims[d - 1];
    let middle = &dims[1..d - 1];
    let middle_len: usize = middle.iter().sum();
    let tuples = q.pow(middle_len as u32);

    let contribution = |index: u64| -> u64 {
        let mut flat = vec![FieldElem::ZERO; middle_len];
        decode_vector(index, q, middle_len, &mut flat);
        let mut form = pe.clone();
        let mut offset = middle_len;
        for slot in (1..d - 1).rev() {
            let n = dims[slot];
            offset -= n;
            form = form
                .contract(slot, &flat[offset..offset + n])
                .expect("dimensions agree by construction");
        }
        let m = form.flatten(0).expect("arity two");
        q.pow((n_last - m.rank()) as u32)
    };

    let count = if tuples >= 1024 {
        (0..tuples).into_par_iter().map(contribution).sum()
    } else {
        (0..tuples).map(contribution).sum()
    };
    Ok(ZeroSetCount {
        count,
        extension_degree: e,
        ambient,
    })
}

/// Analytic rank via the zero-set count: `Σ_{i≥2} n_i − log_q |Z_P(𝔽_q)|`.
/// Exact powers of q give exact integers.
pub fn analytic_rank_count(p: &MultilinearForm, caps: &Caps) -> Result<f64> {
    let z = zero_set_count(p, 1, caps)?;
    if z.count == 0 {
        return Err(Error::Unsupported(
            "a nonzero linear form has zero bias and infinite analytic rank".into(),
        ));
    }
    let a = z.ambient as f64 - log_base(z.count, p.field().order() as u64);
    Ok(a.max(0.0))
}

/// Analytic rank with the zero set taken in `slot` instead of slot 1.
pub fn analytic_rank_count_at(p: &MultilinearForm, slot: usize, caps: &Caps) -> Result<f64> {
    analytic_rank_count(&p.move_slot_to_front(slot)?, caps)
}

/// Number of points `v ∈ V₁×…×V_d` with `P(v) = x`, for every field element x.
/// Every point is evaluated: for each `(v₂,…,v_d)` the contraction
/// `u = P(·, v₂,…,v_d)` is formed once and `P(v) = u·v₁` is computed for all
/// `v₁`.
pub fn value_distribution(p: &MultilinearForm, caps: &Caps) -> Result<Vec<u64>> {
    let f = p.field().clone();
    let q = f.order() as u64;
    let dims = p.dims();
    let total: usize = dims.iter().sum();
    checked_points(q, total, caps.points, "character-sum enumeration")?;
    let n1 = dims[0];
    let rest_len = total - n1;
    let outer = q.pow(rest_len as u32);
    let inner = q.pow(n1 as u32);

    let partial = |index: u64| -> Vec<u64> {
        let mut hist = vec![0u64; q as usize];
        let mut flat = vec![FieldElem::ZERO; rest_len];
        decode_vector(index, q, rest_len, &mut flat);
        let mut form = p.clone();
        let mut offset = rest_len;
        for slot in (1..dims.len()).rev() {
            let n = dims[slot];
            offset -= n;
            form = form
                .contract(slot, &flat[offset..offset + n])
                .expect("dimensions agree by construction");
        }
        let u = form.coeffs();
        let mut v1 = vec![FieldElem::ZERO; n1];
        for j in 0..inner {
            decode_vector(j, q, n1, &mut v1);
            let value = u
                .iter()
                .zip(&v1)
                .fold(FieldElem::ZERO, |acc, (&a, &b)| f.mul_add(acc, a, b));
            hist[value.index() as usize] += 1;
        }
        hist
    };
    let merge = |mut a: Vec<u64>, b: Vec<u64>| {
        for (x, y) in a.iter_mut().zip(b) {
            *x += y;
        }
        a
    };
    let hist = if outer * inner >= 1 << 14 {
        (0..outer)
            .into_par_iter()
            .map(partial)
            .reduce(|| vec![0u64; q as usize], merge)
    } else {
        (0..outer).map(partial).fold(vec![0u64; q as usize], merge)
    };
    Ok(hist)
}

/// Pairwise summation.
pub fn pairwise_sum(values: &[Complex64]) -> Complex64 {
    match values.len() {
        0 => Complex64::new(0.0, 0.0),
        1 => values[0],
        n => {
            let (a, b) = values.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

fn bias_from_distribution(f: &FieldCtx, hist: &[u64], total_dim: usize, j: u32) -> Result<Complex64> {
    let psi = f.character(j)?;
    let terms: Vec<Complex64> = hist
        .iter()
        .enumerate()
        .map(|(x, &n)| psi.eval(FieldElem(x as u32)) * n as f64)
        .collect();
    let scale = (f.order() as f64).powi(total_dim as i32);
    Ok(pairwise_sum(&terms) / scale)
}

/// The bias `A_ψ(P) = q^{−Σ n_i}·Σ_v ψ_j(P(v))`.
pub fn bias_charsum(p: &MultilinearForm, j: u32, caps: &Caps) -> Result<Complex64> {
    p.field().character(j)?;
    let hist = value_distribution(p, caps)?;
    bias_from_distribution(p.field(), &hist, p.dims().iter().sum(), j)
}

fn rank_from_bias(a: Complex64, q: u32) -> Result<f64> {
    let norm = a.norm();
    if norm < 1e-12 {
        return Err(Error::Internal(format!(
            "bias magnitude {norm:e} is below 1e-12"
        )));
    }
    Ok(-norm.ln() / (q as f64).ln())
}

/// `−log_q |A_{ψ_j}(P)|` from the direct character sum.
pub fn analytic_rank_charsum(p: &MultilinearForm, j: u32, caps: &Caps) -> Result<f64> {
    rank_from_bias(bias_charsum(p, j, caps)?, p.field().order())
}

/// Character-sum analytic rank for every nontrivial `j ∈ 1..p`, sharing one
/// pass over the domain.
pub fn analytic_rank_charsum_all(p: &MultilinearForm, caps: &Caps) -> Result<Vec<(u32, f64)>> {
    let f = p.field();
    let hist = value_distribution(p, caps)?;
    let total = p.dims().iter().sum();
    (1..f.p())
        .map(|j| {
            let a = bias_from_distribution(f, &hist, total, j)?;
            Ok((j, rank_from_bias(a, f.order())?))
        })
        .collect()
}

/// Subspaces `W_i ⊂ V_i` on whose product the form vanishes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubspaceWitness {
    pub subspaces: Vec<Subspace>,
    pub codim_sum: usize,
}

/// Outcome of a vanishing-subspace search.
#[derive(Clone, Debug)]
pub struct SliceRank {
    /// The exact rank when `exact`, otherwise an upper bound.
    pub value: usize,
    pub exact: bool,
    /// Every codimension sum below this was exhausted.
    pub lower_bound: usize,
    pub witness: SubspaceWitness,
    /// Subspace tuples tested.
    pub tuples_tested: u64,
}

enum SearchStop {
    Found(Vec<Subspace>),
    Budget,
}

struct VanishingSearch<'a> {
    field: FieldCtx,
    caps: &'a Caps,
    /// Slots enumerated explicitly, in order; the final searched slot is the
    /// last slot of `tensor` and is solved as a kernel.
    prefix: Vec<usize>,
    tested: u64,
    lists: HashMap<(usize, usize), Rc<Vec<Subspace>>>,
}

impl VanishingSearch<'_> {
    fn subspaces(&mut self, n: usize, codim: usize) -> Result<Rc<Vec<Subspace>>> {
        if let Some(list) = self.lists.get(&(n, codim)) {
            return Ok(list.clone());
        }
        let list: Vec<Subspace> =
            linalg::subspaces_of_codim(&self.field, n, codim, self.caps.subspaces)?.collect();
        let list = Rc::new(list);
        self.lists.insert((n, codim), list.clone());
        Ok(list)
    }

    /// Walks prefix slot `level` onward with codimensions `comp`, looking for a
    /// tuple whose final kernel has codimension at most `c_last`.
    fn descend(
        &mut self,
        tensor: &MultilinearForm,
        level: usize,
        comp: &[usize],
        c_last: usize,
        chosen: &mut Vec<Subspace>,
    ) -> Result<Option<SearchStop>> {
        if level == self.prefix.len() {
            self.tested += 1;
            if self.tested > self.caps.search {
                return Ok(Some(SearchStop::Budget));
            }
            let n_last = *tensor.dims().last().unwrap();
            let rows = tensor.coeffs().len() / n_last;
            let m = Matrix::new(self.field.clone(), rows, n_last, tensor.coeffs().to_vec())
                .expect("reshape of a valid array");
            let rank = m.rank();
            if rank <= c_last {
                let mut ws = chosen.clone();
                ws.push(m.kernel());
                return Ok(Some(SearchStop::Found(ws)));
            }
            return Ok(None);
        }
        let slot = self.prefix[level];
        let n = tensor.dims()[slot];
        let list = self.subspaces(n, comp[level])?;
        for w in list.iter() {
            let restricted = tensor.change_basis(slot, w.basis())?;
            chosen.push(w.clone());
            let out = self.descend(&restricted, level + 1, comp, c_last, chosen)?;
            chosen.pop();
            if out.is_some() {
                return Ok(out);
            }
        }
        Ok(None)
    }
}

/// Calls `visit` on every composition `(c₁,…,c_k)` with `c_i ≤ bounds[i]` and
/// `Σ c_i ≤ total`, in lexicographic order. Stops early when `visit` returns
/// `Some`.
fn for_each_composition<T>(
    bounds: &[usize],
    total: usize,
    visit: &mut dyn FnMut(&[usize]) -> Result<Option<T>>,
) -> Result<Option<T>> {
    fn rec<T>(
        bounds: &[usize],
        remaining: usize,
        current: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]) -> Result<Option<T>>,
    ) -> Result<Option<T>> {
        let i = current.len();
        if i == bounds.len() {
            return visit(current);
        }
        for c in 0..=bounds[i].min(remaining) {
            current.push(c);
            let out = rec(bounds, remaining - c, current, visit)?;
            current.pop();
            if out.is_some() {
                return Ok(out);
            }
        }
        Ok(None)
    }
    rec(bounds, total, &mut Vec::with_capacity(bounds.len()), visit)
}

/// `Ok((codim_sum, subspaces, tested))` or `Err((lower_bound, tested))`.
type SearchResult = std::result::Result<(usize, Vec<Subspace>, u64), (usize, u64)>;

/// Minimum of `Σ codim W_s` over the `searched` slots such that `tensor`
/// vanishes on the product, with unsearched slots held at the full space.
///
/// Iterative deepening on the codimension sum r; for each r, compositions of
/// the enumerated slots in lexicographic order, subspaces in canonical order.
/// The first witness found wins. Returns `Ok(Err(lower_bound))` when the
/// budget runs out.
fn vanishing_search(
    tensor: &MultilinearForm,
    searched: &[usize],
    caps: &Caps,
) -> Result<SearchResult> {
    let d = tensor.arity();
    let last = *searched.last().expect("at least one searched slot");
    // Put the final searched slot at the end so each leaf is a reshape.
    let mut perm: Vec<usize> = (0..d).filter(|&s| s != last).collect();
    perm.push(last);
    let moved = tensor.permute_slots(&perm)?;
    let position = |slot: usize| perm.iter().position(|&s| s == slot).unwrap();
    let prefix: Vec<usize> = searched[..searched.len() - 1].iter().map(|&s| position(s)).collect();
    let bounds: Vec<usize> = prefix.iter().map(|&s| moved.dims()[s]).collect();
    let n_last = tensor.dims()[last];
    let max_r = bounds.iter().sum::<usize>() + n_last;

    let mut search = VanishingSearch {
        field: tensor.field().clone(),
        caps,
        prefix,
        tested: 0,
        lists: HashMap::new(),
    };
    for r in 0..=max_r {
        let found = for_each_composition(&bounds, r, &mut |comp| {
            let c_last = r - comp.iter().sum::<usize>();
            if c_last > n_last {
                return Ok(None);
            }
            let mut chosen = Vec::new();
            search.descend(&moved, 0, comp, c_last, &mut chosen)
        });
        let found = match found {
            Err(e) if e.is_cap_exceeded() => return Ok(Err((r, search.tested))),
            other => other?,
        };
        match found {
            Some(SearchStop::Found(ws)) => {
                // Reassemble in the caller's slot order.
                let mut by_slot: Vec<Option<Subspace>> = vec![None; d];
                for (&s, w) in searched.iter().zip(ws) {
                    by_slot[s] = Some(w);
                }
                let subspaces = by_slot
                    .into_iter()
                    .enumerate()
                    .map(|(s, w)| w.unwrap_or_else(|| Subspace::full(tensor.field(), tensor.dims()[s])))
                    .collect::<Vec<_>>();
                let codim: usize = searched.iter().map(|&s| subspaces[s].codim()).sum();
                return Ok(Ok((codim, subspaces, search.tested)));
            }
            Some(SearchStop::Budget) => return Ok(Err((r, search.tested))),
            None => {}
        }
    }
    Err(Error::Internal("vanishing search exhausted without a witness".into()))
}

/// Upper bound `min_i rank(flatten(P, i))`: the left kernel of the slot-i
/// flattening, with every other slot full, is a vanishing witness.
pub fn slice_rank_upper_bound(p: &MultilinearForm) -> Result<(usize, SubspaceWitness)> {
    let mut best: Option<(usize, usize, Matrix)> = None;
    for slot in 0..p.arity() {
        let flat = p.flatten(slot)?;
        let rank = flat.rank();
        if best.as_ref().is_none_or(|(r, _, _)| rank < *r) {
            best = Some((rank, slot, flat));
        }
    }
    let (rank, slot, flat) = best.expect("arity is positive");
    let subspaces = (0..p.arity())
        .map(|s| {
            if s == slot {
                flat.left_kernel()
            } else {
                Subspace::full(p.field(), p.dims()[s])
            }
        })
        .collect();
    Ok((
        rank,
        SubspaceWitness {
            subspaces,
            codim_sum: rank,
        },
    ))
}

/// Exact slice rank with a witness, or a flagged upper bound when the search
/// budget or subspace cap is exceeded.
pub fn slice_rank_exact(p: &MultilinearForm, caps: &Caps) -> Result<SliceRank> {
    let searched: Vec<usize> = (0..p.arity()).collect();
    match vanishing_search(p, &searched, caps)? {
        Ok((value, subspaces, tested)) => Ok(SliceRank {
            value,
            exact: true,
            lower_bound: value,
            witness: SubspaceWitness {
                subspaces,
                codim_sum: value,
            },
            tuples_tested: tested,
        }),
        Err((lower_bound, tested)) => {
            let (value, witness) = slice_rank_upper_bound(p)?;
            Ok(SliceRank {
                value,
                exact: value <= lower_bound,
                lower_bound: lower_bound.min(value),
                witness,
                tuples_tested: tested,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchmidtRank {
    pub value: usize,
    pub exact: bool,
    /// Set for arity ≥ 4, where slice rank only bounds the Schmidt rank.
    pub upper_bound_only: bool,
}

/// For arity ≤ 3 the slice rank is the Schmidt rank; above that it is an
/// upper bound.
pub fn schmidt_rank(p: &MultilinearForm, caps: &Caps) -> Result<SchmidtRank> {
    let s = slice_rank_exact(p, caps)?;
    let upper_bound_only = p.arity() >= 4;
    Ok(SchmidtRank {
        value: s.value,
        exact: s.exact && !upper_bound_only,
        upper_bound_only,
    })
}

fn check_matrix_list(l: &[Matrix]) -> Result<(FieldCtx, usize, usize)> {
    let first = l
        .first()
        .ok_or_else(|| Error::InvalidInput("empty list of matrices".into()))?;
    for m in l {
        if m.shape() != first.shape() || m.field() != first.field() {
            return Err(Error::Dimension("matrices differ in shape or field".into()));
        }
    }
    Ok((first.field().clone(), first.rows(), first.cols()))
}

/// A basis of the span of `l`, as matrices.
pub fn matrix_space_basis(l: &[Matrix]) -> Result<Vec<Matrix>> {
    let (field, rows, cols) = check_matrix_list(l)?;
    let stacked: Vec<FieldElem> = l.iter().flat_map(|m| m.data().iter().copied()).collect();
    let vectors = Matrix::new(field.clone(), l.len(), rows * cols, stacked)?;
    let span = Subspace::span(&vectors);
    (0..span.dim())
        .map(|i| Matrix::new(field.clone(), rows, cols, span.basis().row(i).to_vec()))
        .collect()
}

/// The stacked tensor `T[k, i, j] = L_k[i, j]`.
fn matrices_to_tensor(l: &[Matrix]) -> Result<MultilinearForm> {
    let (field, rows, cols) = check_matrix_list(l)?;
    let coeffs = l.iter().flat_map(|m| m.data().iter().copied()).collect();
    MultilinearForm::new(field, vec![l.len(), rows, cols], coeffs)
}

/// Minimum of `codim W₁ + codim W₂` such that every `l ∈ L` vanishes on
/// `W₁ × W₂` (as the bilinear form `xᵀ l y`).
pub fn subspace_rank_exact(l: &[Matrix], caps: &Caps) -> Result<SliceRank> {
    let tensor = matrices_to_tensor(l)?;
    match vanishing_search(&tensor, &[1, 2], caps)? {
        Ok((value, mut subspaces, tested)) => {
            subspaces.remove(0);
            Ok(SliceRank {
                value,
                exact: true,
                lower_bound: value,
                witness: SubspaceWitness {
                    subspaces,
                    codim_sum: value,
                },
                tuples_tested: tested,
            })
        }
        Err(_) => Err(Error::CapExceeded {
            what: "subspace-rank search",
            needed: u128::MAX,
            cap: caps.search as u128,
        }),
    }
}

/// Every element of the span of `basis` over its base field, in the order of
/// coefficient vectors read as base-q integers (first coefficient least
/// significant).
pub fn span_elements(basis: &[Matrix]) -> impl Iterator<Item = (Vec<FieldElem>, Matrix)> + '_ {
    let q = basis.first().map_or(1, |m| m.field().order() as u64);
    let k = basis.len();
    let total = q.pow(k as u32);
    (0..total).map(move |idx| {
        let mut coeffs = vec![FieldElem::ZERO; k];
        decode_vector(idx, q, k, &mut coeffs);
        let m = Matrix::linear_combination(basis, &coeffs).expect("basis is homogeneous");
        (coeffs, m)
    })
}

/// Seeded sampler of random elements of `span(basis)` over an extension.
/// Each extension degree reads its own ChaCha stream so that adding samples
/// only extends, never reshuffles, the sequence.
pub(crate) fn sample_combinations(
    basis: &[Matrix],
    ext_e: u32,
    samples: usize,
    seed: u64,
) -> Result<Vec<Matrix>> {
    let Some(first) = basis.first() else {
        return Ok(Vec::new());
    };
    let emb = first.field().extension(ext_e)?;
    let big = emb.target();
    let lifted: Vec<Matrix> = basis.iter().map(|m| m.embed(&emb)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(ext_e as u64);
    (0..samples)
        .map(|_| {
            let coeffs: Vec<FieldElem> = lifted.iter().map(|_| big.random(&mut rng)).collect();
            Matrix::linear_combination(&lifted, &coeffs)
        })
        .collect()
}

/// Largest exhaustive span enumerated by [`generic_max_rank`].
pub const EXHAUSTIVE_SPAN_DIM: usize = 4;

/// Maximal rank of an element of `L`: exhaustive over the base field when
/// `dim L ≤ 4`, plus `samples` random combinations over each 𝔽_{q^e},
/// `e = 1..=ext_e`. Taking the running maximum over all degrees makes the
/// result nondecreasing in both `ext_e` and `samples`.
pub fn generic_max_rank(l: &[Matrix], ext_e: u32, samples: usize, seed: u64) -> Result<usize> {
    let basis = matrix_space_basis(l)?;
    if basis.is_empty() {
        return Ok(0);
    }
    let full = basis[0].rows().min(basis[0].cols());
    let mut best = 0;
    if basis.len() <= EXHAUSTIVE_SPAN_DIM {
        for (_, m) in span_elements(&basis) {
            best = best.max(m.rank());
            if best == full {
                return Ok(best);
            }
        }
    }
    for e in 1..=ext_e {
        for m in sample_combinations(&basis, e, samples, seed)? {
            best = best.max(m.rank());
            if best == full {
                return Ok(best);
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExtensionCount {
    pub extension_degree: u32,
    pub count: u64,
    /// `log_{q^e} |Z_P(𝔽_{q^e})|`.
    pub dim_estimate: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GHat {
    Exact(usize),
    /// The estimate was too close to a half-integer to round.
    Ambiguous { low: usize, high: usize },
}

impl GHat {
    pub fn exact(self) -> Option<usize> {
        match self {
            GHat::Exact(g) => Some(g),
            GHat::Ambiguous { .. } => None,
        }
    }

    /// Inclusive range of candidate values.
    pub fn range(self) -> (usize, usize) {
        match self {
            GHat::Exact(g) => (g, g),
            GHat::Ambiguous { low, high } => (low, high),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodimEstimate {
    pub ambient: usize,
    pub g_hat: GHat,
    pub trace: Vec<ExtensionCount>,
}

/// Heuristic `codim Z_P` from `dim ≈ log_{q^e} |Z_P(𝔽_{q^e})|` at `e = e_max`.
/// Rounds only when the estimate is within 0.25 of an integer.
pub fn codim_estimate(p: &MultilinearForm, e_max: u32, caps: &Caps) -> Result<CodimEstimate> {
    if p.arity() < 2 {
        return Err(Error::Unsupported("codimension estimate needs arity at least 2".into()));
    }
    if e_max < 1 {
        return Err(Error::InvalidInput("e_max must be at least 1".into()));
    }
    let q = p.field().order() as u64;
    let mut trace = Vec::with_capacity(e_max as usize);
    let mut ambient = 0;
    for e in 1..=e_max {
        let z = zero_set_count(p, e, caps)?;
        ambient = z.ambient;
        trace.push(ExtensionCount {
            extension_degree: e,
            count: z.count,
            dim_estimate: log_base(z.count, q.pow(e)),
        });
    }
    let x = trace.last().unwrap().dim_estimate;
    let clamp = |v: f64| (ambient as f64 - v).clamp(0.0, ambient as f64) as usize;
    let nearest = x.round();
    let g_hat = if (x - nearest).abs() <= 0.25 {
        GHat::Exact(clamp(nearest))
    } else {
        GHat::Ambiguous {
            low: clamp(x.ceil()),
            high: clamp(x.floor()),
        }
    };
    Ok(CodimEstimate {
        ambient,
        g_hat,
        trace,
    })
}
