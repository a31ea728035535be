//! Full verification pipeline for one ordered pair and its machine-readable
//! record. The report is the unit of output for both single-pair runs and
//! batch scans; every enabled sub-check contributes a pass/fail verdict and
//! the overall verdict is PASS only when none failed.

use std::collections::BTreeMap;
use std::time::Instant;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::forms::{kuroda_check, KurodaReport};
use crate::kernels::{
    analyze_kernels, eligibility, generators, identity_suite, order_two_check, thm17_count,
    IdentityReport, IdentityStatus, OrderTwoReport,
};
use crate::multiquad::Context;
use crate::pell::fund_unit;

/// Which sub-checks to run; disabled checks are reported as skipped and do
/// not affect the verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckToggles {
    pub kernels: bool,
    pub order2: bool,
    pub kuroda: bool,
    pub identities: bool,
}

impl Default for CheckToggles {
    fn default() -> Self {
        Self {
            kernels: true,
            order2: true,
            kuroda: true,
            identities: true,
        }
    }
}

impl CheckToggles {
    pub const NAMES: [&'static str; 4] = ["kernels", "order2", "kuroda", "identities"];

    /// Parses a comma list like "kernels,kuroda"; unknown names error.
    pub fn from_list(list: &str) -> std::result::Result<Self, String> {
        let mut t = Self {
            kernels: false,
            order2: false,
            kuroda: false,
            identities: false,
        };
        for name in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            match name {
                "kernels" => t.kernels = true,
                "order2" => t.order2 = true,
                "kuroda" => t.kuroda = true,
                "identities" => t.identities = true,
                other => return Err(format!("unknown check '{other}'")),
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunOptions {
    pub prec_bits: u32,
    pub checks: CheckToggles,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            prec_bits: 256,
            checks: CheckToggles::default(),
            timings: false,
        }
    }
}

/// Fundamental unit summary; coordinates as strings since they routinely
/// exceed machine integers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FundUnitSummary {
    pub d: String,
    pub x: String,
    pub y: String,
    pub denom: u8,
    pub norm: i8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelEntry {
    pub predicted: String,
    pub computed: String,
    pub matches: bool,
    /// order of the computed kernel and the theorem count `2·[E_k : N(E_K)]`,
    /// absent for the genus field
    #[serde(skip_serializing_if = "Option::is_none")]
    pub computed_order: Option<u8>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub thm17: Option<u8>,
}

/// The complete verification record for one ordered pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairReport {
    pub schema: u32,
    pub p1: String,
    pub p2: String,
    /// ((p₁/p₂), (2/p₁), (2/p₂))
    pub symbols: (i8, i8, i8),
    pub eligible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ineligible_reason: Option<String>,
    pub fund_units: Vec<FundUnitSummary>,
    /// norm of the fundamental unit of Q(√(2p₁p₂))
    pub norm_eps_d: i8,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q3: Option<u8>,
    pub sfu_shapes: BTreeMap<String, String>,
    pub kernels: BTreeMap<String, KernelEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kuroda: Option<KurodaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order2: Option<OrderTwoReport>,
    pub identities: Vec<IdentityReport>,
    pub checks_run: Vec<String>,
    /// irregularities worth surfacing that are not failures by themselves
    /// (e.g. a Kuroda check skipped because the discriminant exceeds the
    /// form-enumeration range)
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    pub overall: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings_ms: Option<BTreeMap<String, u64>>,
}

impl PairReport {
    pub fn passed(&self) -> bool {
        self.overall == "PASS"
    }
}

/// Runs the full pipeline for one ordered pair. Invalid inputs error;
/// ineligible pairs return a report with `eligible = false` and no theorem
/// checks asserted.
pub fn run_pair(p1: &BigUint, p2: &BigUint, opts: &RunOptions) -> Result<PairReport> {
    let elig = eligibility(p1, p2)?;
    let mut report = PairReport {
        schema: 1,
        p1: p1.to_string(),
        p2: p2.to_string(),
        symbols: elig.symbols,
        eligible: elig.eligible,
        ineligible_reason: elig.reason.clone(),
        fund_units: Vec::new(),
        norm_eps_d: 0,
        q3: None,
        sfu_shapes: BTreeMap::new(),
        kernels: BTreeMap::new(),
        kuroda: None,
        order2: None,
        identities: Vec::new(),
        checks_run: Vec::new(),
        notes: Vec::new(),
        overall: "INELIGIBLE".into(),
        timings_ms: opts.timings.then(BTreeMap::new),
    };
    if !elig.eligible {
        return Ok(report);
    }

    let mut failures = 0usize;
    let record_time = |report: &mut PairReport, stage: &str, start: Instant| {
        if let Some(t) = report.timings_ms.as_mut() {
            t.insert(stage.to_string(), start.elapsed().as_millis() as u64);
        }
    };

    let start = Instant::now();
    let p1_prime = crate::arith::Prime1Mod4::new(p1.clone())?;
    let p2_prime = crate::arith::Prime1Mod4::new(p2.clone())?;
    let ctx = Context::with_precision(p1_prime.clone(), p2_prime.clone(), opts.prec_bits)?;

    // fundamental units of the seven quadratic subfields of L
    let two = BigUint::from(2u32);
    let ds = [
        two.clone(),
        p1.clone(),
        p2.clone(),
        p1 * &two,
        p2 * &two,
        p1 * p2,
        p1 * p2 * &two,
    ];
    for d in &ds {
        let u = fund_unit(d)?;
        report.fund_units.push(FundUnitSummary {
            d: d.to_string(),
            x: u.x.to_string(),
            y: u.y.to_string(),
            denom: u.denom,
            norm: u.norm,
        });
    }
    report.norm_eps_d = report.fund_units.last().unwrap().norm;
    record_time(&mut report, "fund_units", start);

    let gens = generators(&ctx)?;

    if opts.checks.kernels {
        let start = Instant::now();
        let analysis = analyze_kernels(&ctx, &gens)?;
        report.q3 = Some(analysis.q3.q);
        report.notes.extend(analysis.sfu_corrections.clone());
        for t in &analysis.towers {
            report
                .sfu_shapes
                .insert(t.tower.label().into(), t.sfu.shape.as_str().into());
            let matches = t.computed == t.predicted;
            let count = thm17_count(t.norm_index);
            let count_ok = t.computed.order() as u8 == count;
            if !matches || !count_ok {
                failures += 1;
            }
            report.kernels.insert(
                t.tower.label().into(),
                KernelEntry {
                    predicted: t.predicted.generator_cell(),
                    computed: t.computed.generator_cell(),
                    matches,
                    computed_order: Some(t.computed.order() as u8),
                    thm17: Some(count),
                },
            );
        }
        let genus_matches = analysis.genus_computed == analysis.genus_predicted;
        if !genus_matches {
            failures += 1;
        }
        report.kernels.insert(
            "k*".into(),
            KernelEntry {
                predicted: analysis.genus_predicted.generator_cell(),
                computed: analysis.genus_computed.generator_cell(),
                matches: genus_matches,
                computed_order: None,
                thm17: None,
            },
        );
        report.checks_run.push("kernels".into());
        record_time(&mut report, "kernels", start);
    }

    if opts.checks.order2 {
        let start = Instant::now();
        let r = order_two_check(&ctx, &gens)?;
        if !r.pass {
            failures += 1;
        }
        report.order2 = Some(r);
        report.checks_run.push("order2".into());
        record_time(&mut report, "order2", start);
    }

    if opts.checks.kuroda {
        let start = Instant::now();
        match kuroda_check(&p1_prime, &p2_prime) {
            Ok(r) => {
                if !r.pass {
                    failures += 1;
                }
                report.kuroda = Some(r);
            }
            // enumeration range exceeded: a legitimate skip, not a verdict
            Err(crate::error::Error::DiscriminantTooLarge(d)) => {
                report
                    .notes
                    .push(format!("kuroda skipped: discriminant 4*{d} exceeds the enumeration range"));
            }
            // an eligible pair whose unit fails the norm hypothesis
            // contradicts the structure theory: that is a failure
            Err(crate::error::Error::KurodaNotApplicable(reason)) => {
                failures += 1;
                report.notes.push(format!("kuroda refused: {reason}"));
            }
            Err(e) => return Err(e),
        }
        report.checks_run.push("kuroda".into());
        record_time(&mut report, "kuroda", start);
    }

    if opts.checks.identities {
        let start = Instant::now();
        let reports = identity_suite(&ctx)?;
        if reports.iter().any(|r| r.status == IdentityStatus::Failed) {
            failures += 1;
        }
        report.identities = reports;
        report.checks_run.push("identities".into());
        record_time(&mut report, "identities", start);
    }

    report.overall = if failures == 0 { "PASS" } else { "FAIL" }.into();
    Ok(report)
}

/// Column headers of the delimited scan format.
pub const CSV_HEADER: &str = "p1,p2,eligible,sym_pp,sym_2p1,sym_2p2,norm_eps_d,q3,ker_K1,ker_K2,ker_K3,ker_genus,thm17_K1,thm17_K2,thm17_K3,kuroda_v2,overall";

/// One CSV row per report; kernel cells are the computed canonical
/// generators joined by "+", empty when the check did not run.
pub fn csv_row(r: &PairReport) -> String {
    let kernel_cell = |label: &str| -> String {
        r.kernels
            .get(label)
            .map(|k| k.computed.clone())
            .unwrap_or_default()
    };
    let thm17_cell = |label: &str| -> String {
        r.kernels
            .get(label)
            .and_then(|k| k.thm17)
            .map(|v| v.to_string())
            .unwrap_or_default()
    };
    let q3 = r.q3.map(|q| q.to_string()).unwrap_or_default();
    let kuroda = r
        .kuroda
        .as_ref()
        .map(|k| k.v2_sum.to_string())
        .unwrap_or_default();
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.p1,
        r.p2,
        r.eligible,
        r.symbols.0,
        r.symbols.1,
        r.symbols.2,
        r.norm_eps_d,
        q3,
        kernel_cell("K1"),
        kernel_cell("K2"),
        kernel_cell("K3"),
        kernel_cell("k*"),
        thm17_cell("K1"),
        thm17_cell("K2"),
        thm17_cell("K3"),
        kuroda,
        r.overall,
    )
}

/// Human-readable rendering of one report.
pub fn render_text(r: &PairReport) -> String {
    use std::fmt::Write;
    let mut out = String::new();
    let _ = writeln!(out, "pair (p1, p2) = ({}, {})", r.p1, r.p2);
    let _ = writeln!(
        out,
        "symbols: (p1/p2) = {}, (2/p1) = {}, (2/p2) = {}",
        r.symbols.0, r.symbols.1, r.symbols.2
    );
    if !r.eligible {
        let _ = writeln!(
            out,
            "ineligible: {}",
            r.ineligible_reason.as_deref().unwrap_or("unknown")
        );
        return out;
    }
    let _ = writeln!(out, "eligible: yes");
    let _ = writeln!(out, "fundamental units:");
    for u in &r.fund_units {
        let unit = if u.denom == 1 {
            format!("{} + {}*sqrt({})", u.x, u.y, u.d)
        } else {
            format!("({} + {}*sqrt({}))/2", u.x, u.y, u.d)
        };
        let _ = writeln!(out, "  Q(sqrt({:>8})): {}  norm {}", u.d, unit, u.norm);
    }
    if let Some(q3) = r.q3 {
        let _ = writeln!(out, "unit index q of Q(sqrt2, sqrt(p1p2)): {q3}");
    }
    if !r.sfu_shapes.is_empty() {
        let _ = writeln!(out, "fundamental systems:");
        for (tower, shape) in &r.sfu_shapes {
            let _ = writeln!(out, "  {tower}: {shape}");
        }
    }
    if !r.kernels.is_empty() {
        let _ = writeln!(out, "capitulation kernels (predicted | computed):");
        for (label, k) in &r.kernels {
            let mark = if k.matches { "ok" } else { "MISMATCH" };
            let counts = match (k.computed_order, k.thm17) {
                (Some(o), Some(t)) => format!("  |ker| = {o}, count formula = {t}"),
                _ => String::new(),
            };
            let _ = writeln!(
                out,
                "  {label:>3}: {} | {}  [{mark}]{counts}",
                k.predicted, k.computed
            );
        }
    }
    if let Some(k) = &r.kuroda {
        let _ = writeln!(
            out,
            "Kuroda check: h(8p1p2) = {}, h(-8p1p2) = {}, v2 sum = {} [{}]", k.h_real, k.h_imag, k.v2_sum,
            if k.pass { "ok" } else { "FAIL" }
        );
    }
    if let Some(o) = &r.order2 {
        let _ = writeln!(
            out,
            "order-2 check: {} {}",
            if o.pass { "all 7 nonzero classes non-principal" } else { "FAILED" },
            if o.h1h2_criterion {
                "(H1H2 also by the norm criterion)"
            } else {
                ""
            }
        );
    }
    if !r.identities.is_empty() {
        let _ = writeln!(out, "radical identities:");
        for i in &r.identities {
            let status = match i.status {
                IdentityStatus::Passed => "pass",
                IdentityStatus::Skipped => "skip",
                IdentityStatus::Failed => "FAIL",
            };
            let variant = i
                .variant
                .as_deref()
                .map(|v| format!(" [{v}]"))
                .unwrap_or_default();
            let _ = writeln!(out, "  {status}  {}{variant}: {}", i.id, i.detail);
        }
    }
    for note in &r.notes {
        let _ = writeln!(out, "note: {note}");
    }
    if let Some(t) = &r.timings_ms {
        let _ = writeln!(out, "timings (ms):");
        for (stage, ms) in t {
            let _ = writeln!(out, "  {stage}: {ms}");
        }
    }
    let _ = writeln!(out, "overall: {}", r.overall);
    out
}

pub fn render_json(r: &PairReport) -> String {
    serde_json::to_string_pretty(r).expect("report serializes")
}

pub fn parse_json(s: &str) -> std::result::Result<PairReport, serde_json::Error> {
    serde_json::from_str(s)
}
