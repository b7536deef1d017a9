//! Matrix pencils `sA + tB`: Kronecker blocks, projective rank profiles, the
//! rank-pencil criterion `B(ker A) ⊂ im A` and its finite-field failure, the
//! derivative test on kernels of a bilinear family, and the reduction of a
//! space of maps to a (kernel, image) pair of a maximal-rank element.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfq::{FieldCtx, FieldElem};
use crate::linalg::{Matrix, Subspace};
use crate::ranks::{matrix_space_basis, sample_combinations, span_elements};

/// Largest projective line enumerated by a rank profile.
pub const MAX_PROFILE_POINTS: u64 = 1_000_000;
/// Largest base-field span searched exhaustively by [`prop22_reduce`].
pub const EXHAUSTIVE_SPAN_SIZE: u64 = 100_000;
pub const DEFAULT_EXT_E: u32 = 4;

/// Two maps `A, B : 𝔽^cols → 𝔽^rows` of the same shape.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pencil {
    a: Matrix,
    b: Matrix,
}

impl Pencil {
    pub fn new(a: Matrix, b: Matrix) -> Result<Self> {
        if a.shape() != b.shape() || a.field() != b.field() {
            return Err(Error::Dimension(format!(
                "pencil halves differ: {:?} vs {:?}",
                a.shape(),
                b.shape()
            )));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Matrix {
        &self.b
    }

    pub fn field(&self) -> &FieldCtx {
        self.a.field()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }

    /// `sA + tB`.
    pub fn at(&self, s: FieldElem, t: FieldElem) -> Matrix {
        Matrix::linear_combination(&[self.a.clone(), self.b.clone()], &[s, t]).expect("same shape")
    }

    pub fn embed(&self, emb: &crate::gfq::Embedding) -> Pencil {
        Pencil {
            a: self.a.embed(emb),
            b: self.b.embed(emb),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    /// `A_n, B_n : 𝔽^n → 𝔽^{n+1}`, `A_n e_i = f_i`, `B_n e_i = f_{i+1}`.
    Ln,
    /// `A′_n, B′_n : 𝔽^{n+1} → 𝔽^n`, `A′_n = [I | 0]`, `B′_n = [0 | I]`.
    LnTranspose,
}

pub fn kronecker_block(kind: BlockKind, n: usize, field: &FieldCtx) -> Pencil {
    let (a, b) = match kind {
        BlockKind::Ln => {
            let mut a = Matrix::zeros(field, n + 1, n);
            let mut b = Matrix::zeros(field, n + 1, n);
            for i in 0..n {
                a[(i, i)] = FieldElem::ONE;
                b[(i + 1, i)] = FieldElem::ONE;
            }
            (a, b)
        }
        BlockKind::LnTranspose => {
            let mut a = Matrix::zeros(field, n, n + 1);
            let mut b = Matrix::zeros(field, n, n + 1);
            for i in 0..n {
                a[(i, i)] = FieldElem::ONE;
                b[(i, i + 1)] = FieldElem::ONE;
            }
            (a, b)
        }
    };
    Pencil { a, b }
}

/// A point `(s:t)` of ℙ¹, normalised to `(1:t)` or `(0:1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProjectivePoint {
    pub s: FieldElem,
    pub t: FieldElem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankProfile {
    pub extension_degree: u32,
    /// `(1:t)` for every t in encoding order, then `(0:1)`.
    pub points: Vec<(ProjectivePoint, usize)>,
}

impl RankProfile {
    /// `rank(A)`, the value at `(1:0)`.
    pub fn rank_a(&self) -> usize {
        self.points[0].1
    }

    /// `rank(B)`, the value at `(0:1)`.
    pub fn rank_b(&self) -> usize {
        self.points.last().unwrap().1
    }

    /// Ranks at the affine points `(1:t)`.
    pub fn affine(&self) -> impl Iterator<Item = (FieldElem, usize)> + '_ {
        self.points[..self.points.len() - 1].iter().map(|(p, r)| (p.t, *r))
    }
}

/// `rank(sA + tB)` at every point of `ℙ¹(𝔽_{q^e})`.
pub fn rank_profile(pencil: &Pencil, ext_e: u32) -> Result<RankProfile> {
    let emb = pencil.field().extension(ext_e)?;
    let big = emb.target().clone();
    let n = big.order() as u64 + 1;
    if n > MAX_PROFILE_POINTS {
        return Err(Error::CapExceeded {
            what: "rank profile",
            needed: n as u128,
            cap: MAX_PROFILE_POINTS as u128,
        });
    }
    let lifted = pencil.embed(&emb);
    let mut points: Vec<(ProjectivePoint, usize)> = big
        .elements()
        .map(|t| {
            let p = ProjectivePoint { s: FieldElem::ONE, t };
            (p, lifted.at(p.s, p.t).rank())
        })
        .collect();
    points.push((
        ProjectivePoint {
            s: FieldElem::ZERO,
            t: FieldElem::ONE,
        },
        lifted.b.rank(),
    ));
    Ok(RankProfile {
        extension_degree: ext_e,
        points,
    })
}

/// Whether `l` maps every vector of `w` into `v`.
pub fn maps_into(l: &Matrix, w: &Subspace, v: &Subspace) -> bool {
    (0..w.dim()).all(|i| {
        let image = l.mul_vec(w.basis().row(i)).expect("shapes agree");
        v.contains(&image)
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KrReport {
    /// `rank(A) ≥ rank(A + tB)` for every `t ∈ 𝔽_q`.
    pub affine_hypothesis_base: bool,
    /// The same over `𝔽_{q^e}`.
    pub affine_hypothesis_ext: bool,
    /// `B(ker A) ⊂ im A`.
    pub conclusion: bool,
    pub extension_degree: u32,
    /// `q^e > min(rows, cols)·(q + 1)`: the extension has more points than
    /// a crude bound on the degenerate ones.
    pub extension_sufficient: bool,
}

impl KrReport {
    /// The extension hypothesis held and the conclusion failed.
    pub fn is_counterexample(&self) -> bool {
        self.extension_sufficient && self.affine_hypothesis_ext && !self.conclusion
    }
}

fn affine_hypothesis(profile: &RankProfile) -> bool {
    let ra = profile.rank_a();
    profile.affine().all(|(_, r)| r <= ra)
}

pub fn kr_check(pencil: &Pencil, ext_e: u32) -> Result<KrReport> {
    let base = rank_profile(pencil, 1)?;
    let ext = rank_profile(pencil, ext_e)?;
    let conclusion = maps_into(&pencil.b, &pencil.a.kernel(), &pencil.a.image());
    let q = pencil.field().order() as u64;
    let (rows, cols) = pencil.shape();
    Ok(KrReport {
        affine_hypothesis_base: affine_hypothesis(&base),
        affine_hypothesis_ext: affine_hypothesis(&ext),
        conclusion,
        extension_degree: ext_e,
        extension_sufficient: q.pow(ext_e) > rows.min(cols) as u64 * (q + 1),
    })
}

/// `A = diag(x)` over the basis `{e_x : x ∈ 𝔽_q}` in encoding order, `B = I`.
/// Every `A + tB` with `t ∈ 𝔽_q` has exactly one zero on the diagonal, yet
/// `B e_0 = e_0 ∉ im A`.
pub fn kr_counterexample(field: &FieldCtx) -> Pencil {
    let diag: Vec<FieldElem> = field.elements().collect();
    Pencil {
        a: Matrix::diagonal(field, &diag),
        b: Matrix::identity(field, diag.len()),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Claim0Report {
    /// `rank(B + tC) ≤ rank(B)` for every `t ∈ 𝔽_{q^e}`.
    pub hypothesis: bool,
    /// `C` vanishes on `S_U × S_V`, the left and right kernels of `B`.
    pub conclusion: bool,
    pub pass: bool,
}

pub fn claim0_check(b: &Matrix, c: &Matrix, ext_e: u32) -> Result<Claim0Report> {
    let pencil = Pencil::new(b.clone(), c.clone())?;
    let profile = rank_profile(&pencil, ext_e)?;
    let hypothesis = affine_hypothesis(&profile);
    let restricted = crate::linalg::restrict_bilinear(c, &b.left_kernel(), &b.kernel())?;
    let conclusion = restricted.is_zero();
    Ok(Claim0Report {
        hypothesis,
        conclusion,
        pass: !hypothesis || conclusion,
    })
}

/// `W′ = ker M`, `V′ = im M` for a maximal-rank `M ∈ L`, with every `l ∈ L`
/// mapping `W′` into `V′`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Prop22Witness {
    pub w_prime: Subspace,
    pub v_prime: Subspace,
    pub r_tilde: usize,
    /// The witness needed coefficients outside the base field.
    pub over_extension: bool,
    /// Field over which `W′`, `V′` are defined.
    pub field: FieldCtx,
    /// The element `M`.
    pub element: Matrix,
}

fn verified_witness(basis: &[Matrix], candidates: Vec<Matrix>, over_extension: bool) -> Option<Prop22Witness> {
    let r_tilde = candidates.iter().map(Matrix::rank).max()?;
    candidates
        .into_iter()
        .filter(|m| m.rank() == r_tilde)
        .find_map(|m| {
            let (w, v) = (m.kernel(), m.image());
            basis.iter().all(|l| maps_into(l, &w, &v)).then(|| Prop22Witness {
                field: m.field().clone(),
                w_prime: w,
                v_prime: v,
                r_tilde,
                over_extension,
                element: m,
            })
        })
}

/// Searches `L` for a maximal-rank element whose kernel and image verify, first
/// over the base field (exhaustively when `q^{dim L} ≤ 10⁵`, otherwise
/// `samples` random elements), then among `samples` random elements over
/// `𝔽_{q^e}`.
pub fn prop22_reduce(l: &[Matrix], ext_e: u32, samples: usize, seed: u64) -> Result<Prop22Witness> {
    let basis = matrix_space_basis(l)?;
    let field = l[0].field().clone();
    if basis.is_empty() {
        let (rows, cols) = l[0].shape();
        return Ok(Prop22Witness {
            w_prime: Subspace::full(&field, cols),
            v_prime: Subspace::zero(&field, rows),
            r_tilde: 0,
            over_extension: false,
            field: field.clone(),
            element: Matrix::zeros(&field, rows, cols),
        });
    }
    let q = field.order() as u64;
    let exhaustive = (q as u128).pow(basis.len() as u32) <= EXHAUSTIVE_SPAN_SIZE as u128;
    let base: Vec<Matrix> = if exhaustive {
        span_elements(&basis).map(|(_, m)| m).collect()
    } else {
        sample_combinations(&basis, 1, samples, seed)?
    };
    if let Some(w) = verified_witness(&basis, base, false) {
        return Ok(w);
    }
    if ext_e > 1 {
        let emb = field.extension(ext_e)?;
        let lifted: Vec<Matrix> = basis.iter().map(|m| m.embed(&emb)).collect();
        let ext = sample_combinations(&basis, ext_e, samples, seed)?;
        if let Some(w) = verified_witness(&lifted, ext, true) {
            return Ok(w);
        }
    }
    Err(Error::NoWitness(format!("GF({q}) and its degree-{ext_e} extension")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ranks::{generic_max_rank, subspace_rank_exact, Caps};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn gf(q: u64) -> FieldCtx {
        FieldCtx::with_order(q).unwrap()
    }

    fn m(f: &FieldCtx, r: usize, c: usize, d: &[u64]) -> Matrix {
        Matrix::from_indices(f, r, c, d).unwrap()
    }

    fn random_matrix(f: &FieldCtx, r: usize, c: usize, rng: &mut ChaCha8Rng) -> Matrix {
        Matrix::new(f.clone(), r, c, (0..r * c).map(|_| f.random(rng)).collect()).unwrap()
    }

    #[test]
    fn kronecker_block_shapes() {
        let f = gf(2);
        let l1 = kronecker_block(BlockKind::Ln, 1, &f);
        assert_eq!(l1.a(), &m(&f, 2, 1, &[1, 0]));
        assert_eq!(l1.b(), &m(&f, 2, 1, &[0, 1]));
        let t1 = kronecker_block(BlockKind::LnTranspose, 1, &f);
        assert_eq!(t1.a(), &m(&f, 1, 2, &[1, 0]));
        assert_eq!(t1.b(), &m(&f, 1, 2, &[0, 1]));
        assert_eq!(kronecker_block(BlockKind::Ln, 0, &f).shape(), (1, 0));
        assert_eq!(kronecker_block(BlockKind::LnTranspose, 0, &f).shape(), (0, 1));
        let l2 = kronecker_block(BlockKind::LnTranspose, 2, &f);
        assert_eq!(l2.b(), &m(&f, 2, 3, &[0, 1, 0, 0, 0, 1]));
    }

    #[test]
    fn kronecker_blocks_have_constant_rank() {
        for q in [2, 3] {
            let f = gf(q);
            for n in 0..=4 {
                for kind in [BlockKind::Ln, BlockKind::LnTranspose] {
                    let p = kronecker_block(kind, n, &f);
                    for e in 1..=3 {
                        let prof = rank_profile(&p, e).unwrap();
                        assert_eq!(prof.points.len() as u64, q.pow(e) + 1);
                        assert!(prof.points.iter().all(|&(_, r)| r == n));
                    }
                }
            }
        }
    }

    #[test]
    fn profile_examples() {
        let f = gf(2);
        let p = Pencil::new(Matrix::identity(&f, 2), Matrix::zeros(&f, 2, 2)).unwrap();
        let prof = rank_profile(&p, 1).unwrap();
        assert_eq!(prof.points.iter().map(|x| x.1).collect::<Vec<_>>(), [2, 2, 0]);
        let kr = kr_counterexample(&f);
        assert_eq!(kr.a(), &m(&f, 2, 2, &[0, 0, 0, 1]));
        let prof = rank_profile(&kr, 1).unwrap();
        assert_eq!(prof.points.iter().map(|x| x.1).collect::<Vec<_>>(), [1, 1, 2]);
    }

    #[test]
    fn counterexample_reproduces() {
        for q in [2, 3, 5] {
            let f = gf(q);
            let kr = kr_counterexample(&f);
            let prof = rank_profile(&kr, 1).unwrap();
            assert!(prof.affine().all(|(_, r)| r == q as usize - 1));
            let rep = kr_check(&kr, 4).unwrap();
            assert!(rep.affine_hypothesis_base);
            assert!(!rep.conclusion);
            assert!(!rep.affine_hypothesis_ext);
            assert!(!rep.is_counterexample());
        }
    }

    #[test]
    fn kr_check_identity_pair() {
        let f = gf(3);
        let p = Pencil::new(Matrix::identity(&f, 2), Matrix::identity(&f, 2)).unwrap();
        let rep = kr_check(&p, 4).unwrap();
        assert!(rep.affine_hypothesis_base && rep.affine_hypothesis_ext && rep.conclusion);
    }

    #[test]
    fn kr_screen_finds_no_counterexample() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for q in [2, 3] {
            let f = gf(q);
            for i in 0..400 {
                let cols = if i % 2 == 0 { 3 } else { 4 };
                let p = Pencil::new(random_matrix(&f, 3, cols, &mut rng), random_matrix(&f, 3, cols, &mut rng)).unwrap();
                assert!(!kr_check(&p, 4).unwrap().is_counterexample());
            }
        }
    }

    #[test]
    fn claim0_examples() {
        let f = gf(2);
        let b = m(&f, 3, 3, &[1, 1, 0, 0, 0, 0, 1, 1, 0]);
        let rep = claim0_check(&b, &b, 2).unwrap();
        assert!(rep.hypothesis && rep.conclusion && rep.pass);
        let rep = claim0_check(&Matrix::zeros(&f, 2, 2), &Matrix::identity(&f, 2), 2).unwrap();
        assert!(!rep.hypothesis && rep.pass);
    }

    #[test]
    fn claim0_random_screen() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = gf(2);
        for _ in 0..10_000 {
            let b = random_matrix(&f, 3, 3, &mut rng);
            let c = if rng.gen_bool(0.3) { b.scale(FieldElem::ONE) } else { random_matrix(&f, 3, 3, &mut rng) };
            assert!(claim0_check(&b, &c, 4).unwrap().pass);
        }
    }

    #[test]
    fn prop22_examples() {
        let f = gf(2);
        let a = m(&f, 3, 3, &[1, 1, 0, 0, 1, 0, 0, 0, 0]);
        let w = prop22_reduce(std::slice::from_ref(&a), 4, 10, 0).unwrap();
        assert_eq!((w.w_prime.clone(), w.v_prime.clone(), w.r_tilde), (a.kernel(), a.image(), 2));
        assert!(!w.over_extension);

        let l = [m(&f, 2, 2, &[0, 0, 0, 1]), Matrix::identity(&f, 2)];
        let w = prop22_reduce(&l, 4, 10, 0).unwrap();
        assert_eq!(w.r_tilde, 2);
        assert_eq!(w.w_prime.dim(), 0);
        assert_eq!(w.v_prime.dim(), 2);

        let l = [Matrix::unit(&f, 2, 2, 0, 0), Matrix::unit(&f, 2, 2, 1, 1)];
        let w = prop22_reduce(&l, 4, 10, 0).unwrap();
        assert_eq!(w.r_tilde, 2);
        assert_eq!(subspace_rank_exact(&l, &Caps::default()).unwrap().value, 2);
    }

    #[test]
    fn prop22_falls_back_to_extension() {
        // diag(s, t, s+t): each rank-2 point over 𝔽_2 has a kernel the other
        // generator does not map into the image.
        let f = gf(2);
        let l = [m(&f, 3, 3, &[1, 0, 0, 0, 0, 0, 0, 0, 1]), m(&f, 3, 3, &[0, 0, 0, 0, 1, 0, 0, 0, 1])];
        let w = prop22_reduce(&l, 4, 50, 1).unwrap();
        assert!(w.over_extension);
        assert_eq!(w.r_tilde, 3);
        assert_eq!(w.field.order(), 16);
        assert!(matches!(prop22_reduce(&l, 1, 50, 1), Err(Error::NoWitness(_))));
    }

    #[test]
    fn subspace_rank_at_most_twice_generic_rank() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = gf(2);
        for _ in 0..30 {
            let l = [random_matrix(&f, 3, 3, &mut rng), random_matrix(&f, 3, 3, &mut rng)];
            let r = subspace_rank_exact(&l, &Caps::default()).unwrap().value;
            let rt = generic_max_rank(&l, 8, 50, 0).unwrap();
            assert!(r <= 2 * rt);
            if let Ok(w) = prop22_reduce(&l, 4, 20, 0) {
                if !w.over_extension {
                    assert!(r <= 2 * w.r_tilde);
                }
            }
        }
    }
}
