use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::forms::PolynomialFn;
use crate::gfq::FieldElem;
use crate::ranks::{bias_charsum, pairwise_sum, Caps, TOLERANCE};

use super::report::{CheckOutcome, CheckStatus};

fn decode(mut index: u64, p: u64, out: &mut [FieldElem]) {
    for x in out.iter_mut() {
        *x = FieldElem((index % p) as u32);
        index /= p;
    }
}

fn encode(v: &[FieldElem], p: u64) -> usize {
    v.iter().rev().fold(0u64, |acc, x| acc * p + x.index() as u64) as usize
}

/// `‖ψ(Q)‖_{U_d}^{2^d}` by direct summation of
/// `Δ_{h_d}⋯Δ_{h_1} f(x) = Π_{S ⊆ [d]} C^{d−|S|} f(x + Σ_{i∈S} h_i)` over all
/// `(x, h₁, …, h_d)`, where `C` is complex conjugation and `ψ = ψ₁`.
pub fn gowers_norm_power(q_fn: &PolynomialFn, d: usize, caps: &Caps) -> Result<Complex64> {
    let f = q_fn.field();
    let p = f.p() as u64;
    let n = q_fn.num_vars();
    if d == 0 {
        return Err(Error::InvalidInput("the U_d norm needs d ≥ 1".into()));
    }
    let tuples = (p as u128).checked_pow((n * (d + 1)) as u32).unwrap_or(u128::MAX);
    if tuples > caps.points as u128 {
        return Err(Error::CapExceeded {
            what: "Gowers-norm enumeration",
            needed: tuples,
            cap: caps.points as u128,
        });
    }
    let psi = f.character(1)?;
    let size = p.pow(n as u32);
    let mut point = vec![FieldElem::ZERO; n];
    let values: Vec<Complex64> = (0..size)
        .map(|y| {
            decode(y, p, &mut point);
            psi.eval(q_fn.eval_unchecked(&point))
        })
        .collect();

    let subsets = 1usize << d;
    let mut hs = vec![vec![FieldElem::ZERO; n]; d];
    let mut shifted = vec![vec![FieldElem::ZERO; n]; subsets];
    let mut per_x = Vec::with_capacity(size as usize);
    let mut terms = Vec::with_capacity(size.pow(d as u32) as usize);
    for x in 0..size {
        decode(x, p, &mut shifted[0]);
        terms.clear();
        for h in 0..size.pow(d as u32) {
            let mut rest = h;
            for hi in hs.iter_mut() {
                decode(rest % size, p, hi);
                rest /= size;
            }
            let mut term = Complex64::new(1.0, 0.0);
            for s in 0..subsets {
                if s > 0 {
                    let top = usize::BITS - 1 - s.leading_zeros();
                    let prev = s & !(1 << top);
                    let (lo, hi) = shifted.split_at_mut(s);
                    for ((out, &a), &b) in hi[0].iter_mut().zip(&lo[prev]).zip(&hs[top as usize]) {
                        *out = f.add(a, b);
                    }
                }
                let v = values[encode(&shifted[s], p)];
                term *= if (d - s.count_ones() as usize) % 2 == 1 { v.conj() } else { v };
            }
            terms.push(term);
        }
        per_x.push(pairwise_sum(&terms));
    }
    Ok(pairwise_sum(&per_x) / tuples as f64)
}

/// Compares `‖ψ(Q)‖_{U_d}^{2^d}` with the bias of the polarization `Q̃`.
pub fn gowers_bias_identity(q_fn: &PolynomialFn, d: usize, caps: &Caps) -> Result<CheckOutcome> {
    let p = q_fn.field().p() as usize;
    if d >= p {
        return Err(Error::Unsupported(format!(
            "the identity needs d < p (d = {d}, p = {p})"
        )));
    }
    let polar = q_fn.polarize(d)?;
    let right = bias_charsum(&polar, 1, caps)?;
    let left = gowers_norm_power(q_fn, d, caps)?;
    let distance = (left - right).norm();
    let status = if distance <= TOLERANCE {
        CheckStatus::Pass
    } else {
        CheckStatus::Fail
    };
    Ok(CheckOutcome {
        name: "gowers_bias_identity".into(),
        left: left.re,
        right: right.re,
        tolerance: TOLERANCE,
        status,
        heuristic: false,
        note: format!("|difference| = {distance:e}"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::Monomial;
    use crate::gfq::FieldCtx;
    use crate::ranks::analytic_rank_count;

    fn caps() -> Caps {
        Caps::default()
    }

    #[test]
    fn zero_polynomial_has_unit_norm_and_bias() {
        let f = FieldCtx::new(3, 1).unwrap();
        let q = PolynomialFn::new(&f, 2, vec![]).unwrap();
        let out = gowers_bias_identity(&q, 2, &caps()).unwrap();
        assert!(out.passed());
        assert!((out.left - 1.0).abs() < 1e-12 && (out.right - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_of_two_variables_over_f3() {
        let f = FieldCtx::new(3, 1).unwrap();
        let q = PolynomialFn::new(&f, 2, vec![Monomial { exps: vec![1, 1], coeff: FieldElem::ONE }]).unwrap();
        let out = gowers_bias_identity(&q, 2, &caps()).unwrap();
        assert!(out.passed(), "{out:?}");
        // The polarization is a rank-two bilinear form, so the bias is q^{-2}.
        let a = analytic_rank_count(&q.polarize(2).unwrap(), &caps()).unwrap();
        assert_eq!(a, 2.0);
        assert!((out.left - 1.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn random_quadratics_and_cubics() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        for seed in 0..10 {
            let q = PolynomialFn::random(&f3, 2, 2, seed).unwrap();
            assert!(gowers_bias_identity(&q, 2, &caps()).unwrap().passed());
        }
        let f5 = FieldCtx::new(5, 1).unwrap();
        for seed in 0..3 {
            let q = PolynomialFn::random(&f5, 1, 3, seed).unwrap();
            assert!(gowers_bias_identity(&q, 3, &caps()).unwrap().passed());
        }
    }

    #[test]
    fn refuses_degree_at_least_characteristic() {
        let f3 = FieldCtx::new(3, 1).unwrap();
        let q = PolynomialFn::random(&f3, 2, 2, 0).unwrap();
        assert!(matches!(gowers_bias_identity(&q, 3, &caps()), Err(Error::Unsupported(_))));
    }

    #[test]
    fn respects_point_cap() {
        let f5 = FieldCtx::new(5, 1).unwrap();
        let q = PolynomialFn::random(&f5, 3, 3, 0).unwrap();
        let tight = Caps { points: 1000, ..Caps::default() };
        assert!(gowers_norm_power(&q, 3, &tight).unwrap_err().is_cap_exceeded());
    }
}
