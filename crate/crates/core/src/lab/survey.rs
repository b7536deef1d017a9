use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::MultilinearForm;
use crate::gfq::{FieldCtx, FieldDescriptor};
use crate::ranks::{Caps, GHat};

use super::report::{check_suite, theorem_violation, CheckId, CheckStatus, RankReport, SuiteOptions};

pub const CSV_VERSION_LINE: &str = "# tensor-rank-lab v1";

/// Ensemble survey configuration.
///
/// Random mode draws `ensemble` forms with seeds `seed, seed+1, …`. Exhaustive
/// mode visits every form of the given shape in enumeration order and ignores
/// `ensemble` and `seed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyConfig {
    pub field: FieldDescriptor,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub d: Option<usize>,
    #[serde(default)]
    pub ensemble: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub exhaustive: bool,
    /// Checks to run. When absent every check runs and inapplicable ones are
    /// skipped; when present, inapplicable ones are a configuration error.
    #[serde(default)]
    pub checks: Option<Vec<CheckId>>,
    #[serde(default)]
    pub caps: Caps,
    #[serde(default = "default_e_max")]
    pub e_max: u32,
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_e_max() -> u32 {
    3
}

impl SurveyConfig {
    pub fn new(field: FieldDescriptor, dims: Vec<usize>, ensemble: usize, seed: u64) -> Self {
        Self {
            field,
            dims,
            d: None,
            ensemble,
            seed,
            exhaustive: false,
            checks: None,
            caps: Caps::default(),
            e_max: default_e_max(),
            threads: None,
        }
    }

    /// Checks the configuration and returns the field.
    pub fn validate(&self) -> Result<FieldCtx> {
        let field = FieldCtx::from_descriptor(self.field)?;
        let q = field.order() as usize;
        if self.dims.len() < 2 || self.dims.contains(&0) {
            return Err(Error::InvalidInput("dims must list at least two positive sizes".into()));
        }
        let d = self.dims.len();
        if let Some(cd) = self.d {
            if cd != d {
                return Err(Error::InvalidInput(format!("d = {cd} but dims has {d} entries")));
            }
        }
        if self.caps.points == 0 || self.caps.subspaces == 0 || self.caps.search == 0 {
            return Err(Error::InvalidInput("caps must be positive".into()));
        }
        if self.e_max == 0 {
            return Err(Error::InvalidInput("e_max must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidInput("threads must be positive".into()));
        }
        if let Some(checks) = &self.checks {
            for &c in checks {
                match c {
                    CheckId::AGeGRough if q <= d => {
                        return Err(Error::InvalidInput(format!(
                            "check {c} uses the factor 1 − log_q(d) and needs q > d (q = {q}, d = {d})"
                        )))
                    }
                    CheckId::RLeChainC3A if q <= 3 => {
                        return Err(Error::InvalidInput(format!("check {c} needs q > 3 (q = {q})")))
                    }
                    CheckId::RLeChainC3A | CheckId::RLe3AFlat | CheckId::RLe3G if d != 3 => {
                        return Err(Error::InvalidInput(format!("check {c} is defined for d = 3")))
                    }
                    _ => {}
                }
            }
        }
        Ok(field)
    }

    fn instance_count(&self, field: &FieldCtx) -> Result<u64> {
        if !self.exhaustive {
            return Ok(self.ensemble as u64);
        }
        let volume: usize = self.dims.iter().product();
        let total = (field.order() as u128).checked_pow(volume as u32);
        match total {
            Some(t) if t <= self.caps.points as u128 => Ok(t as u64),
            _ => Err(Error::CapExceeded {
                what: "exhaustive survey",
                needed: total.unwrap_or(u128::MAX),
                cap: self.caps.points as u128,
            }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveyRow {
    /// Instance seed, or the enumeration index in exhaustive mode.
    pub seed: u64,
    pub report: RankReport,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub min: Option<f64>,
    pub mean: Option<f64>,
    pub max: Option<f64>,
    /// Instances with `a > 10⁻⁹`.
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub instances: usize,
    pub r_over_a: RatioStats,
    pub max_r: Option<usize>,
    pub non_exact: usize,
    /// Failed checks that rest on the codimension estimate.
    pub heuristic_failures: usize,
    pub failures: BTreeMap<String, usize>,
    pub skips: BTreeMap<String, usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurveyOutcome {
    pub rows: Vec<SurveyRow>,
    pub summary: SurveySummary,
}

/// Runs the survey. Any instance violating `a ≤ r`, or the trilinear chain
/// bound where it is proven, aborts with [`Error::TheoremViolation`].
pub fn run_survey(cfg: &SurveyConfig) -> Result<SurveyOutcome> {
    let field = cfg.validate()?;
    let count = cfg.instance_count(&field)?;
    let opts = SuiteOptions {
        caps: cfg.caps,
        e_max: cfg.e_max,
        checks: cfg.checks.clone().unwrap_or_else(|| CheckId::ALL.to_vec()),
    };
    let instance = |i: u64| -> Result<SurveyRow> {
        let (seed, form) = if cfg.exhaustive {
            (i, MultilinearForm::from_enumeration_index(&field, cfg.dims.clone(), i as u128)?)
        } else {
            let seed = cfg.seed.wrapping_add(i);
            (seed, MultilinearForm::random(&field, cfg.dims.clone(), seed)?)
        };
        Ok(SurveyRow {
            seed,
            report: check_suite(&form, &opts)?,
        })
    };
    let run = || (0..count).into_par_iter().map(instance).collect::<Vec<_>>();
    let results = match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Internal(e.to_string()))?
            .install(run),
        None => run(),
    };

    let mut rows = Vec::with_capacity(results.len());
    for r in results {
        let row = r?;
        if let Some(c) = theorem_violation(&row.report, field.p()) {
            return Err(Error::TheoremViolation {
                seed: row.seed,
                check: c.name.clone(),
                detail: format!("{} > {}", c.left, c.right),
            });
        }
        rows.push(row);
    }
    let summary = summarize(&rows);
    Ok(SurveyOutcome { rows, summary })
}

pub fn summarize(rows: &[SurveyRow]) -> SurveySummary {
    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.report.a > 1e-9)
        .map(|r| r.report.r as f64 / r.report.a)
        .collect();
    let r_over_a = if ratios.is_empty() {
        RatioStats::default()
    } else {
        RatioStats {
            min: ratios.iter().copied().reduce(f64::min),
            mean: Some(ratios.iter().sum::<f64>() / ratios.len() as f64),
            max: ratios.iter().copied().reduce(f64::max),
            count: ratios.len(),
        }
    };
    let mut failures = BTreeMap::new();
    let mut skips = BTreeMap::new();
    let mut heuristic_failures = 0;
    for row in rows {
        for c in &row.report.checks {
            match c.status {
                CheckStatus::Fail => {
                    *failures.entry(c.name.clone()).or_insert(0) += 1;
                    heuristic_failures += c.heuristic as usize;
                }
                CheckStatus::Skipped => *skips.entry(c.name.clone()).or_insert(0) += 1,
                CheckStatus::Pass => {}
            }
        }
    }
    SurveySummary {
        instances: rows.len(),
        r_over_a,
        max_r: rows.iter().map(|r| r.report.r).max(),
        non_exact: rows.iter().filter(|r| !r.report.r_exact).count(),
        heuristic_failures,
        failures,
        skips,
    }
}

/// `%g`-style rendering with 12 significant digits.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    let trim = |s: &str| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s.to_string()
        }
    };
    if (-5..12).contains(&exp) {
        trim(&format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{exp}", trim(mantissa))
    }
}

fn g_hat_cell(g: Option<GHat>) -> String {
    match g {
        Some(GHat::Exact(g)) => g.to_string(),
        Some(GHat::Ambiguous { low, high }) => format!("{low}..{high}"),
        None => String::new(),
    }
}

/// Writes the versioned CSV: a comment line, the header, one row per instance.
pub fn write_csv<W: Write>(rows: &[SurveyRow], mut out: W) -> Result<()> {
    writeln!(out, "{CSV_VERSION_LINE}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "q", "dims", "d", "a", "r", "r_exact", "g_hat", "checks"])?;
    for row in rows {
        let rep = &row.report;
        let dims = rep.dims.iter().map(usize::to_string).collect::<Vec<_>>().join("x");
        let checks = rep
            .checks
            .iter()
            .map(|c| format!("{}:{}", c.name, c.status.short()))
            .collect::<Vec<_>>()
            .join(";");
        w.write_record([
            row.seed.to_string(),
            rep.q.to_string(),
            dims,
            rep.d.to_string(),
            format_float(rep.a),
            rep.r.to_string(),
            rep.r_exact.to_string(),
            g_hat_cell(rep.g_hat()),
            checks,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn csv_bytes(rows: &[SurveyRow]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf)?;
    Ok(buf)
}
