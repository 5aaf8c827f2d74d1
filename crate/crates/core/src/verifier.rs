//! Sweeps that compare the closed forms against rank oracles.
//!
//! Each cell evaluates a closed form, forms the product of Lucas terms it
//! describes, and recomputes the rank with an oracle. Disagreements are
//! recorded in the report and never abort the sweep.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{evaluate, FormulaCase, Theorem};
use crate::error::{Error, Result};
use crate::gcd_identities::{divides_uu, divides_vu};
use crate::lucas::{make_params, u_exact, u_terms, v_exact, v_terms, LucasParams, SequenceValue};
use crate::rank::{tau_min_divisor_oracle, tau_scan, TauMethod};

/// Closed-form values below this also get a linear-scan cross-check.
pub const DEFAULT_SCAN_THRESHOLD: u64 = 10_000_000;
/// Longest scan the `scan` oracle will attempt.
pub const DEFAULT_SCAN_LIMIT: u64 = 100_000_000;

/// Coprime, non-degenerate parameters with `a > 0` and `a^2 + 4b > 0`.
pub const DEFAULT_GRID: [(i64, i64); 7] = [(1, 1), (2, 1), (3, 1), (1, 2), (3, 2), (3, -1), (4, -3)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleKind {
    Scan,
    DivisorMinimality,
}

impl std::str::FromStr for OracleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "scan" => Ok(OracleKind::Scan),
            "divisor-minimality" => Ok(OracleKind::DivisorMinimality),
            _ => Err(Error::BadRange(format!("unknown oracle {s:?}"))),
        }
    }
}

/// Inputs swept: `(m, n)` pairs for the two-index formulas, `(n, p)` for
/// the triple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepRanges {
    pub first: Vec<u64>,
    pub second: Vec<u64>,
}

impl SweepRanges {
    pub fn new(
        first: impl IntoIterator<Item = u64>,
        second: impl IntoIterator<Item = u64>,
    ) -> Self {
        SweepRanges {
            first: first.into_iter().collect(),
            second: second.into_iter().collect(),
        }
    }

    /// The default ranges used by the acceptance sweeps.
    pub fn default_for(theorem: Theorem) -> Self {
        match theorem {
            Theorem::Triple => SweepRanges::new(1..=60, [3, 5, 7]),
            _ => SweepRanges::new(3..=20, 3..=20),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepConfig {
    pub oracle: OracleKind,
    pub scan_threshold: u64,
    pub scan_limit: u64,
    pub jobs: usize,
    /// Record per-cell wall time; off by default so reports are reproducible.
    pub timing: bool,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            oracle: OracleKind::DivisorMinimality,
            scan_threshold: DEFAULT_SCAN_THRESHOLD,
            scan_limit: DEFAULT_SCAN_LIMIT,
            jobs: 1,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellInputs {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
    pub n: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
}

impl CellInputs {
    fn for_theorem(theorem: Theorem, first: u64, second: u64) -> Self {
        match theorem {
            Theorem::Triple => CellInputs {
                m: None,
                n: first,
                p: Some(second),
            },
            _ => CellInputs {
                m: Some(first),
                n: second,
                p: None,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepCell {
    pub inputs: CellInputs,
    #[serde(with = "crate::serde_big::biguint")]
    pub closed_form_value: BigUint,
    #[serde(with = "crate::serde_big::opt_biguint")]
    pub oracle_value: Option<BigUint>,
    /// Linear-scan rank, when the cross-check ran.
    pub scan_check: Option<u64>,
    pub case_label: FormulaCase,
    pub agree: bool,
    /// Why the oracle produced no value, if it did not.
    pub note: Option<String>,
    pub elapsed_ms: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SweepSummary {
    pub total: usize,
    pub agreed: usize,
    pub disagreed: usize,
    pub oracle_cap_hits: usize,
    pub branch_coverage: BTreeMap<FormulaCase, usize>,
}

impl SweepSummary {
    fn tally(theorem: Theorem, cells: &[SweepCell]) -> Self {
        let mut coverage: BTreeMap<FormulaCase, usize> =
            theorem.branches().iter().map(|&c| (c, 0)).collect();
        for cell in cells {
            *coverage.entry(cell.case_label).or_default() += 1;
        }
        let agreed = cells.iter().filter(|c| c.agree).count();
        SweepSummary {
            total: cells.len(),
            agreed,
            disagreed: cells.len() - agreed,
            oracle_cap_hits: cells
                .iter()
                .filter(|c| c.note.as_deref().is_some_and(|n| n.starts_with(CAP_HIT)))
                .count(),
            branch_coverage: coverage,
        }
    }

    /// Branches of the theorem no cell reached.
    pub fn uncovered(&self) -> Vec<FormulaCase> {
        self.branch_coverage
            .iter()
            .filter(|(_, &count)| count == 0)
            .map(|(&case, _)| case)
            .collect()
    }
}

/// Comparison against the earlier, non-minimal triple-product formula.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RemarkComparison {
    #[serde(with = "crate::serde_big::biguint")]
    pub previous_formula_value: BigUint,
    #[serde(with = "crate::serde_big::biguint")]
    pub ratio: BigUint,
    pub previous_is_multiple: bool,
    pub previous_is_minimal: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub params: LucasParams,
    pub theorem: Theorem,
    pub oracle: OracleKind,
    pub cells: Vec<SweepCell>,
    pub summary: SweepSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remark: Option<RemarkComparison>,
}

impl SweepReport {
    pub fn all_agree(&self) -> bool {
        self.summary.disagreed == 0 && self.remark.as_ref().map_or(true, |r| !r.previous_is_minimal)
    }
}

const CAP_HIT: &str = "oracle-cap-hit";

/// Exact Lucas terms for `0..=max_index`.
struct Terms {
    u: Vec<BigInt>,
    v: Vec<BigInt>,
}

impl Terms {
    fn new(params: &LucasParams, max_index: u64) -> Result<Self> {
        let len = max_index as usize + 1;
        Ok(Terms {
            u: u_terms(params, len)?,
            v: v_terms(params, len)?,
        })
    }

    fn u(&self, n: u64) -> BigUint {
        self.u[n as usize].abs().to_biguint().unwrap()
    }

    fn v(&self, n: u64) -> BigUint {
        self.v[n as usize].abs().to_biguint().unwrap()
    }

    /// The product whose rank the theorem describes.
    fn target(&self, theorem: Theorem, first: u64, second: u64) -> BigUint {
        match theorem {
            Theorem::UmVn => self.u(first) * self.v(second),
            Theorem::UmUn => self.u(first) * self.u(second),
            Theorem::VmVn => self.v(first) * self.v(second),
            Theorem::Triple => {
                self.u(first) * self.u(first + second) * self.u(first + 2 * second)
            }
        }
    }
}

fn max_index(theorem: Theorem, ranges: &SweepRanges) -> u64 {
    let f = ranges.first.iter().copied().max().unwrap_or(0);
    let s = ranges.second.iter().copied().max().unwrap_or(0);
    match theorem {
        Theorem::Triple => f + 2 * s,
        _ => f.max(s),
    }
}

fn run_cell(
    params: &LucasParams,
    theorem: Theorem,
    first: u64,
    second: u64,
    terms: &Terms,
    config: &SweepConfig,
) -> Result<SweepCell> {
    let started = Instant::now();
    let closed = evaluate(params, theorem, first, second)?;
    let target = terms.target(theorem, first, second);
    let closed_value = closed.value.to_u64();
    let mut note = None;
    let mut scan_check = None;

    let oracle_value = match config.oracle {
        OracleKind::DivisorMinimality => match closed_value {
            None => {
                note = Some(format!("{CAP_HIT}: closed form exceeds 64 bits"));
                None
            }
            Some(multiple) => match tau_min_divisor_oracle(params, &target, multiple) {
                Ok(t) => Some(BigUint::from(t.value)),
                Err(Error::NotAMultiple { .. }) => {
                    note = Some("closed form is not a multiple of the rank".into());
                    None
                }
                Err(e) => return Err(e),
            },
        },
        OracleKind::Scan => {
            let cap = closed_value
                .and_then(|v| v.checked_mul(2))
                .map_or(config.scan_limit, |c| c.saturating_add(10).min(config.scan_limit));
            match tau_scan(params, &target, cap) {
                Ok(t) => Some(BigUint::from(t.value)),
                Err(Error::NotFound { cap }) => {
                    note = Some(format!("{CAP_HIT}: no rank found up to {cap}"));
                    None
                }
                Err(e) => return Err(e),
            }
        }
    };

    if config.oracle == OracleKind::DivisorMinimality {
        if let Some(v) = closed_value.filter(|&v| v < config.scan_threshold) {
            scan_check = match tau_scan(params, &target, v) {
                Ok(t) => Some(t.value),
                Err(Error::NotFound { .. }) => None,
                Err(e) => return Err(e),
            };
            if scan_check.is_none() {
                note.get_or_insert_with(|| "scan found no rank up to the closed form".into());
            }
        }
    }

    let oracle_agrees = oracle_value.as_ref() == Some(&closed.value);
    let scan_agrees = match (closed_value, config.oracle) {
        (Some(v), OracleKind::DivisorMinimality) if v < config.scan_threshold => {
            scan_check == Some(v)
        }
        _ => true,
    };
    Ok(SweepCell {
        inputs: CellInputs::for_theorem(theorem, first, second),
        closed_form_value: closed.value,
        oracle_value,
        scan_check,
        case_label: closed.case_label,
        agree: oracle_agrees && scan_agrees,
        note,
        elapsed_ms: config
            .timing
            .then(|| started.elapsed().as_millis() as u64),
    })
}

fn pool(jobs: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .expect("thread pool")
}

/// Runs every cell of `ranges` for one parameter pair.
pub fn sweep(
    params: &LucasParams,
    theorem: Theorem,
    ranges: &SweepRanges,
    config: &SweepConfig,
) -> Result<SweepReport> {
    params.require_eligible()?;
    let terms = Terms::new(params, max_index(theorem, ranges))?;
    let inputs: Vec<(u64, u64)> = ranges
        .first
        .iter()
        .flat_map(|&f| ranges.second.iter().map(move |&s| (f, s)))
        .collect();
    let cells = pool(config.jobs).install(|| {
        inputs
            .par_iter()
            .map(|&(f, s)| run_cell(params, theorem, f, s, &terms, config))
            .collect::<Result<Vec<_>>>()
    })?;
    let summary = SweepSummary::tally(theorem, &cells);
    Ok(SweepReport {
        params: *params,
        theorem,
        oracle: config.oracle,
        cells,
        summary,
        remark: None,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridReport {
    pub theorem: Theorem,
    pub reports: Vec<SweepReport>,
    pub total: usize,
    pub disagreed: usize,
    pub branch_coverage: BTreeMap<FormulaCase, usize>,
}

/// [`sweep`] for each parameter pair, with coverage merged across the grid.
pub fn sweep_grid(
    grid: &[LucasParams],
    theorem: Theorem,
    ranges: &SweepRanges,
    config: &SweepConfig,
) -> Result<GridReport> {
    let reports = grid
        .iter()
        .map(|params| sweep(params, theorem, ranges, config))
        .collect::<Result<Vec<_>>>()?;
    let mut coverage = BTreeMap::new();
    for report in &reports {
        for (&case, &count) in &report.summary.branch_coverage {
            *coverage.entry(case).or_insert(0) += count;
        }
    }
    Ok(GridReport {
        theorem,
        total: reports.iter().map(|r| r.summary.total).sum(),
        disagreed: reports.iter().map(|r| r.summary.disagreed).sum(),
        branch_coverage: coverage,
        reports,
    })
}

pub fn default_grid() -> Vec<LucasParams> {
    DEFAULT_GRID
        .iter()
        .map(|&(a, b)| make_params(a, b).expect("grid parameters are valid"))
        .collect()
}

/// Rank of `F_50 F_55 F_60` against the earlier formula
/// `n(n+p)(n+2p) / (2p^2) * F_p F_{2p}` at `n = 50, p = 5`.
pub fn reproduce_remark() -> SweepReport {
    let params = make_params(1, 1).expect("fibonacci parameters");
    let (n, p) = (50u64, 5u64);
    let config = SweepConfig::default();
    let terms = Terms::new(&params, n + 2 * p).expect("small indices");
    let mut cell = run_cell(&params, Theorem::Triple, n, p, &terms, &config)
        .expect("closed form and oracle run on valid inputs");

    let index_product = BigUint::from(n * (n + p) * (n + 2 * p));
    let previous = index_product / (2 * p * p) * terms.u(p) * terms.u(2 * p);
    let target = terms.target(Theorem::Triple, n, p);
    let previous_u64 = previous.to_u64().expect("fits");
    // Seed the oracle with the earlier value: it is a multiple of the rank,
    // and stripping it must land on the closed form.
    let from_previous = tau_min_divisor_oracle(&params, &target, previous_u64);
    let previous_is_multiple = from_previous.is_ok();
    let stripped = from_previous.ok().map(|t| t.value);
    if let Some(v) = stripped {
        cell.oracle_value = Some(BigUint::from(v));
        cell.agree = cell.agree && BigUint::from(v) == cell.closed_form_value;
    }
    let ratio = &previous / &cell.closed_form_value;
    let remark = RemarkComparison {
        previous_is_minimal: stripped == Some(previous_u64),
        previous_formula_value: previous,
        ratio,
        previous_is_multiple,
    };
    let cells = vec![cell];
    SweepReport {
        params,
        theorem: Theorem::Triple,
        oracle: OracleKind::DivisorMinimality,
        summary: SweepSummary::tally(Theorem::Triple, &cells),
        cells,
        remark: Some(remark),
    }
}

/// Oracle tag used by [`reproduce_remark`].
pub fn remark_oracle_method() -> TauMethod {
    TauMethod::DivisorMinimality
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    /// `U_n | U_m`
    FirstDividesFirst,
    /// `V_n | U_m`
    SecondDividesFirst,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureCheck {
    pub params: LucasParams,
    pub kind: FixtureKind,
    pub n: u64,
    pub m: u64,
    pub divisor: SequenceValue,
    pub dividend: SequenceValue,
    pub expected_divisor: i64,
    pub expected_dividend: i64,
    pub divides: bool,
    pub index_criterion: bool,
    pub rejected_as_ineligible: bool,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub fixtures: Vec<FixtureCheck>,
    pub total: usize,
    pub agreed: usize,
    pub disagreed: usize,
}

/// Divisibility counterexamples for negative discriminant:
/// the term divides but the index criterion fails.
pub const NEGATIVE_DISCRIMINANT_FIXTURES: [(i64, i64, FixtureKind, u64, u64, i64, i64); 4] = [
    (-3, -5, FixtureKind::FirstDividesFirst, 4, 6, 3, 72),
    (1, -2, FixtureKind::FirstDividesFirst, 8, 12, -3, 45),
    (4, -5, FixtureKind::SecondDividesFirst, 3, 4, 4, 24),
    (2, -3, FixtureKind::SecondDividesFirst, 5, 6, 2, -10),
];

pub fn check_delta_negative_fixtures() -> FixtureReport {
    let fixtures: Vec<FixtureCheck> = NEGATIVE_DISCRIMINANT_FIXTURES
        .iter()
        .map(|&(a, b, kind, n, m, exp_div, exp_dividend)| {
            let params = make_params(a, b).expect("fixture parameters are valid");
            let divisor = match kind {
                FixtureKind::FirstDividesFirst => u_exact(&params, n),
                FixtureKind::SecondDividesFirst => v_exact(&params, n),
            }
            .expect("small index");
            let dividend = u_exact(&params, m).expect("small index");
            let divides = (dividend.value() % divisor.value()) == BigInt::from(0);
            let index_criterion = match kind {
                FixtureKind::FirstDividesFirst => m % n == 0,
                FixtureKind::SecondDividesFirst => m % n == 0 && (m / n) % 2 == 0,
            };
            let rejected = matches!(divides_uu(&params, n, m), Err(Error::NotEligible { .. }))
                && matches!(divides_vu(&params, n, m), Err(Error::NotEligible { .. }));
            let agree = divisor.value() == &BigInt::from(exp_div)
                && dividend.value() == &BigInt::from(exp_dividend)
                && divides
                && !index_criterion
                && rejected;
            FixtureCheck {
                params,
                kind,
                n,
                m,
                divisor,
                dividend,
                expected_divisor: exp_div,
                expected_dividend: exp_dividend,
                divides,
                index_criterion,
                rejected_as_ineligible: rejected,
                agree,
            }
        })
        .collect();
    let agreed = fixtures.iter().filter(|f| f.agree).count();
    FixtureReport {
        total: fixtures.len(),
        disagreed: fixtures.len() - agreed,
        agreed,
        fixtures,
    }
}

/// One CSV row per cell, all reports under a single header.
pub fn write_csv<W: Write>(reports: &[SweepReport], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "a",
        "b",
        "theorem",
        "m",
        "n",
        "p",
        "closed_form_value",
        "oracle_value",
        "scan_check",
        "case_label",
        "agree",
        "note",
        "elapsed_ms",
    ])?;
    let opt = |x: Option<u64>| x.map(|v| v.to_string()).unwrap_or_default();
    for (report, cell) in reports
        .iter()
        .flat_map(|r| r.cells.iter().map(move |c| (r, c)))
    {
        w.write_record([
            report.params.a().to_string(),
            report.params.b().to_string(),
            report.theorem.to_string(),
            opt(cell.inputs.m),
            cell.inputs.n.to_string(),
            opt(cell.inputs.p),
            cell.closed_form_value.to_string(),
            cell.oracle_value
                .as_ref()
                .map(|v| v.to_string())
                .unwrap_or_default(),
            opt(cell.scan_check),
            cell.case_label.to_string(),
            cell.agree.to_string(),
            cell.note.clone().unwrap_or_default(),
            opt(cell.elapsed_ms),
        ])?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remark_reproduces() {
        let report = reproduce_remark();
        let cell = &report.cells[0];
        assert_eq!(cell.closed_form_value, BigUint::from(82_500u32));
        assert_eq!(cell.oracle_value, Some(BigUint::from(82_500u32)));
        assert_eq!(cell.scan_check, Some(82_500));
        assert!(cell.agree);
        let remark = report.remark.as_ref().unwrap();
        assert_eq!(remark.previous_formula_value, BigUint::from(907_500u32));
        assert_eq!(remark.ratio, BigUint::from(11u8));
        assert!(remark.previous_is_multiple);
        assert!(!remark.previous_is_minimal);
        assert_eq!(report.oracle, OracleKind::DivisorMinimality);
        assert_eq!(remark_oracle_method(), TauMethod::DivisorMinimality);
        assert!(report.all_agree());
    }

    #[test]
    fn fixtures_reproduce() {
        let report = check_delta_negative_fixtures();
        assert_eq!(report.total, 4);
        assert_eq!(report.disagreed, 0, "{report:#?}");
        let first = &report.fixtures[0];
        assert_eq!(first.divisor.to_string(), "3");
        assert_eq!(first.dividend.to_string(), "72");
        assert!(first.divides && !first.index_criterion);
    }

    #[test]
    fn small_sweeps() {
        let fib = make_params(1, 1).unwrap();
        let config = SweepConfig::default();
        let r = sweep(&fib, Theorem::UmUn, &SweepRanges::new(3..=12, 3..=12), &config).unwrap();
        assert_eq!(r.summary.total, 100);
        assert_eq!(r.summary.disagreed, 0);

        let scan = SweepConfig {
            oracle: OracleKind::Scan,
            ..config
        };
        let r = sweep(&fib, Theorem::Triple, &SweepRanges::new(1..=30, [3]), &scan).unwrap();
        assert_eq!(r.summary.disagreed, 0);
        assert!(r.summary.uncovered().is_empty(), "{:?}", r.summary.branch_coverage);

        let q = make_params(3, 2).unwrap();
        let r = sweep(&q, Theorem::UmVn, &SweepRanges::new(3..=10, 3..=10), &config).unwrap();
        assert_eq!(r.summary.disagreed, 0);
    }

    #[test]
    fn wrong_closed_form_would_be_caught() {
        // The scan oracle must find the true rank of U_4 V_6 = 3 * 18 = 54.
        let fib = make_params(1, 1).unwrap();
        let t = tau_scan(&fib, &BigUint::from(54u32), 1000).unwrap();
        assert_eq!(t.value, 36);
        // and a halved candidate is not a multiple.
        assert!(matches!(
            tau_min_divisor_oracle(&fib, &BigUint::from(54u32), 18),
            Err(Error::NotAMultiple { .. })
        ));
    }

    #[test]
    fn ineligible_sweep_rejected() {
        let q = make_params(-3, -5).unwrap();
        assert!(matches!(
            sweep(&q, Theorem::UmUn, &SweepRanges::new(3..=4, 3..=4), &SweepConfig::default()),
            Err(Error::NotEligible { .. })
        ));
    }

    #[test]
    fn parallel_matches_serial() {
        let q = make_params(3, -1).unwrap();
        let ranges = SweepRanges::new(3..=12, 3..=12);
        let serial = sweep(&q, Theorem::VmVn, &ranges, &SweepConfig::default()).unwrap();
        let parallel = sweep(
            &q,
            Theorem::VmVn,
            &ranges,
            &SweepConfig {
                jobs: 4,
                ..SweepConfig::default()
            },
        )
        .unwrap();
        assert_eq!(
            serde_json::to_string(&serial).unwrap(),
            serde_json::to_string(&parallel).unwrap()
        );
    }

    #[test]
    fn csv_has_row_per_cell() {
        let fib = make_params(1, 1).unwrap();
        let r = sweep(
            &fib,
            Theorem::UmVn,
            &SweepRanges::new(3..=4, 3..=5),
            &SweepConfig::default(),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&r), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 6);
        assert!(text.lines().nth(1).unwrap().starts_with("1,1,um-vn,3,3,,"));
    }
}
