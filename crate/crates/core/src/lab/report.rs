use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::MultilinearForm;
use crate::ranks::{self, Caps, CodimEstimate, GHat, TOLERANCE};

/// Rank constants. `κ_d` for `d ≥ 4` is unknown and deliberately absent.
pub mod constants {
    /// Schmidt's constant for trilinear forms in characteristic ≥ 3.
    pub const D3: f64 = 2.0;
    /// Field-of-definition constant for trilinear forms.
    pub const KAPPA3: f64 = 1.5;
    pub const KAPPA2: f64 = 1.0;
    pub const C2: f64 = 1.0;
    pub const C3_FLAT: f64 = 3.0;
    /// Subspace rank is at most this multiple of the generic max rank.
    pub const E2: usize = 2;

    pub fn kappa(d: usize) -> Option<f64> {
        match d {
            2 => Some(KAPPA2),
            3 => Some(KAPPA3),
            _ => None,
        }
    }

    /// `D₃·κ₃ / (1 − log_q 3)`, defined for `q > 3`.
    pub fn c3_chain(q: u32) -> Option<f64> {
        (q > 3).then(|| D3 * KAPPA3 / (1.0 - 3f64.ln() / (q as f64).ln()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckId {
    /// `a ≤ r`.
    ALeR,
    /// `r ≤ D₃κ₃·a / (1 − log_q 3)`, for `d = 3`, `q > 3`.
    RLeChainC3A,
    /// `r ≤ 3a`, for `d = 3`.
    RLe3AFlat,
    /// `a ≥ ĝ(1 − log_q d)`, for `q > d`.
    AGeGRough,
    /// `|Z_P(𝔽_q)| ≤ d^ĝ·q^{ambient − ĝ}`.
    ZeroCountLeRoughBound,
    /// `r ≤ 3ĝ`, for `d = 3`.
    RLe3G,
}

impl CheckId {
    pub const ALL: [CheckId; 6] = [
        CheckId::ALeR,
        CheckId::RLeChainC3A,
        CheckId::RLe3AFlat,
        CheckId::AGeGRough,
        CheckId::ZeroCountLeRoughBound,
        CheckId::RLe3G,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckId::ALeR => "a_le_r",
            CheckId::RLeChainC3A => "r_le_chain_c3_a",
            CheckId::RLe3AFlat => "r_le_3a_flat",
            CheckId::AGeGRough => "a_ge_g_rough",
            CheckId::ZeroCountLeRoughBound => "zero_count_le_rough_bound",
            CheckId::RLe3G => "r_le_3g",
        }
    }

    /// Depends on the codimension estimate rather than a computed rank.
    pub fn is_heuristic(self) -> bool {
        matches!(
            self,
            CheckId::AGeGRough | CheckId::ZeroCountLeRoughBound | CheckId::RLe3G
        )
    }
}

impl fmt::Display for CheckId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CheckId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown check `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

impl CheckStatus {
    pub fn short(self) -> &'static str {
        match self {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::Skipped => "skip",
        }
    }
}

/// `left ≤ right + tolerance` for inequalities, `|left − right| ≤ tolerance`
/// for identities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub left: f64,
    pub right: f64,
    pub tolerance: f64,
    pub status: CheckStatus,
    pub heuristic: bool,
    pub note: String,
}

impl CheckOutcome {
    pub fn inequality(name: impl Into<String>, left: f64, right: f64, heuristic: bool, note: impl Into<String>) -> Self {
        let status = if left <= right + TOLERANCE {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            left,
            right,
            tolerance: TOLERANCE,
            status,
            heuristic,
            note: note.into(),
        }
    }

    pub fn identity(name: impl Into<String>, left: f64, right: f64, note: impl Into<String>) -> Self {
        let status = if (left - right).abs() <= TOLERANCE {
            CheckStatus::Pass
        } else {
            CheckStatus::Fail
        };
        Self {
            name: name.into(),
            left,
            right,
            tolerance: TOLERANCE,
            status,
            heuristic: false,
            note: note.into(),
        }
    }

    pub fn skipped(id: CheckId, note: impl Into<String>) -> Self {
        Self {
            name: id.name().into(),
            left: f64::NAN,
            right: f64::NAN,
            tolerance: TOLERANCE,
            status: CheckStatus::Skipped,
            heuristic: id.is_heuristic(),
            note: note.into(),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub q: u32,
    pub dims: Vec<usize>,
    pub d: usize,
    pub a: f64,
    pub r: usize,
    pub r_exact: bool,
    pub zero_count: u64,
    pub codim: Option<CodimEstimate>,
    pub checks: Vec<CheckOutcome>,
}

impl RankReport {
    pub fn g_hat(&self) -> Option<GHat> {
        self.codim.as_ref().map(|c| c.g_hat)
    }

    pub fn check(&self, id: CheckId) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.name == id.name())
    }

    pub fn any_failed(&self) -> bool {
        self.checks.iter().any(CheckOutcome::failed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SuiteOptions {
    pub caps: Caps,
    /// Extension degree used by the codimension estimate.
    pub e_max: u32,
    pub checks: Vec<CheckId>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            caps: Caps::default(),
            e_max: 3,
            checks: CheckId::ALL.to_vec(),
        }
    }
}

fn log_q(x: f64, q: u32) -> f64 {
    x.ln() / (q as f64).ln()
}

/// Computes `a`, `r` and (when a heuristic check needs it) `ĝ`, then every
/// requested inequality.
pub fn check_suite(p: &MultilinearForm, opts: &SuiteOptions) -> Result<RankReport> {
    let d = p.arity();
    if d < 2 {
        return Err(Error::InvalidInput("the check suite needs arity at least 2".into()));
    }
    let q = p.field().order();
    let zero = ranks::zero_set_count(p, 1, &opts.caps)?;
    let a = ranks::analytic_rank_count(p, &opts.caps)?;
    let slice = ranks::slice_rank_exact(p, &opts.caps)?;
    let r = slice.value;
    let r_exact = slice.exact;

    let needs_g = opts.checks.iter().any(|c| c.is_heuristic());
    let (codim, codim_note) = if needs_g {
        match ranks::codim_estimate(p, opts.e_max, &opts.caps) {
            Ok(c) => (Some(c), String::new()),
            Err(e) if e.is_cap_exceeded() => (None, e.to_string()),
            Err(e) => return Err(e),
        }
    } else {
        (None, String::new())
    };
    let g = codim.as_ref().and_then(|c| c.g_hat.exact());
    let ambient = zero.ambient;
    let bound_note = if r_exact { "" } else { "r is an upper bound" };

    let mut checks = Vec::with_capacity(opts.checks.len());
    for &id in &opts.checks {
        let trilinear_only = matches!(id, CheckId::RLeChainC3A | CheckId::RLe3AFlat | CheckId::RLe3G);
        if trilinear_only && d != 3 {
            checks.push(CheckOutcome::skipped(id, "defined for trilinear forms"));
            continue;
        }
        if id.is_heuristic() && g.is_none() {
            let note = match &codim {
                None => format!("codimension estimate unavailable: {codim_note}"),
                Some(c) => {
                    let (lo, hi) = c.g_hat.range();
                    format!("codimension estimate ambiguous in [{lo}, {hi}]")
                }
            };
            checks.push(CheckOutcome::skipped(id, note));
            continue;
        }
        let outcome = match id {
            CheckId::ALeR => CheckOutcome::inequality(id.name(), a, r as f64, false, bound_note),
            CheckId::RLeChainC3A => match constants::c3_chain(q) {
                Some(c) => {
                    let mut note = bound_note.to_string();
                    if p.field().p() < 3 {
                        note = join(&note, "D3 = 2 is proven only in characteristic at least 3");
                    }
                    CheckOutcome::inequality(id.name(), r as f64, c * a, false, note)
                }
                None => CheckOutcome::skipped(id, format!("needs q > 3, got q = {q}")),
            },
            CheckId::RLe3AFlat => {
                CheckOutcome::inequality(id.name(), r as f64, constants::C3_FLAT * a, false, bound_note)
            }
            CheckId::AGeGRough => {
                if q as usize <= d {
                    CheckOutcome::skipped(id, format!("needs q > d, got q = {q}, d = {d}"))
                } else {
                    let g = g.unwrap() as f64;
                    let left = g * (1.0 - log_q(d as f64, q));
                    CheckOutcome::inequality(id.name(), left, a, true, "")
                }
            }
            CheckId::ZeroCountLeRoughBound => {
                let g = g.unwrap();
                let right = (d as f64).powi(g as i32) * (q as f64).powi((ambient - g) as i32);
                CheckOutcome::inequality(id.name(), zero.count as f64, right, true, "")
            }
            CheckId::RLe3G => {
                let g = g.unwrap();
                CheckOutcome::inequality(id.name(), r as f64, 3.0 * g as f64, true, bound_note)
            }
        };
        checks.push(outcome);
    }

    Ok(RankReport {
        q,
        dims: p.dims().to_vec(),
        d,
        a,
        r,
        r_exact,
        zero_count: zero.count,
        codim,
        checks,
    })
}

fn join(a: &str, b: &str) -> String {
    if a.is_empty() {
        b.to_string()
    } else {
        format!("{a}; {b}")
    }
}

/// A failed check that contradicts a proven statement: `a ≤ r` always, and the
/// trilinear chain bound when `q > 3`, the characteristic is at least 3 and `r`
/// is exact.
pub fn theorem_violation(report: &RankReport, p_char: u32) -> Option<&CheckOutcome> {
    report.checks.iter().find(|c| {
        c.failed()
            && (c.name == CheckId::ALeR.name()
                || (c.name == CheckId::RLeChainC3A.name() && report.q > 3 && p_char >= 3 && report.r_exact))
    })
}
