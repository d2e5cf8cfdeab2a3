use std::fmt::Write as _;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use super::scenario::Scenario;
use crate::error::{Error, Result};
use crate::fermion::{window_stability_check, CliffordSpec, FockSpace, TauTable};
use crate::hierarchy::{
    check_ba_bilinear_pairing, check_ba_constructions, check_bilinear_identity, check_eigenfunction,
    check_flow_equation, check_flow_resolution, check_hirota, check_lax_equation, check_linear_problem_components,
    check_linear_problem_t1, check_linear_problem_tau, check_sato_equation, check_wave_inverse, check_zero_curvature,
    first_coefficient_antisymmetry_check, Direction, Flow, Hierarchy, HierarchyConfig, HirotaEquation, Residual,
    SchurCorruption, SignTable,
};

/// Process exit codes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ExitStatus {
    Pass = 0,
    Residual = 1,
    Config = 2,
    Unstable = 3,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

/// Deliberate corruption of the hierarchy input, to show the checks bite.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeControl {
    /// Flip one `eps_{ab}(p)` with `tau^p_{ab} != 0`.
    EpsSign,
    /// Add 1 to the `z^-1` coefficient of every Miwa shift of `tau^{p_lo}`.
    SchurCoefficient,
}

impl FromStr for NegativeControl {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "eps-sign" => Ok(Self::EpsSign),
            "schur-coefficient" => Ok(Self::SchurCoefficient),
            _ => Err(Error::Config(format!(
                "unknown negative control `{s}` (expected eps-sign or schur-coefficient)"
            ))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
    pub residuals: Vec<Residual>,
    pub elapsed_ms: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Stability {
    pub window: [i64; 2],
    pub wider: [i64; 2],
    pub stable: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub scenario: Scenario,
    pub clifford: String,
    /// Random draws rejected because some `tau^p(0)` vanished.
    pub redraws: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub negative_control: Option<String>,
    pub stability: Stability,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<Value>,
    pub checks: Vec<CheckReport>,
    pub passed: bool,
    pub exit_code: i32,
}

impl Report {
    pub fn status(&self) -> ExitStatus {
        match self.exit_code {
            0 => ExitStatus::Pass,
            1 => ExitStatus::Residual,
            3 => ExitStatus::Unstable,
            _ => ExitStatus::Config,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text summary for the terminal.
    pub fn to_human(&self) -> String {
        let s = &self.scenario;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "scenario {}: N={} window [{},{}) p {}..={} D={} K_t={} Z_max={} K_trunc={}",
            s.name,
            s.components,
            s.window[0],
            s.window[1],
            s.p_range[0],
            s.p_range[1],
            s.degree,
            s.k_t(),
            s.z_max,
            s.k_trunc
        );
        if self.clifford.is_empty() {
            let _ = writeln!(out, "g = 1");
        } else {
            for line in self.clifford.lines() {
                let _ = writeln!(out, "g: {line}");
            }
        }
        if let Some(nc) = &self.negative_control {
            let _ = writeln!(out, "negative control: {nc}");
        }
        let st = &self.stability;
        let _ = writeln!(
            out,
            "window stability [{},{}) vs [{},{}): {}",
            st.window[0],
            st.window[1],
            st.wider[0],
            st.wider[1],
            if st.stable { "stable" } else { "UNSTABLE" }
        );
        if let Some(tau) = &self.tau {
            for row in tau["entries"].as_array().into_iter().flatten() {
                let p = &row["p"];
                for (a, cells) in row["tau"].as_array().into_iter().flatten().enumerate() {
                    for (b, cell) in cells.as_array().into_iter().flatten().enumerate() {
                        let text = cell.as_str().unwrap_or_default();
                        if a == b && a == 0 {
                            let _ = writeln!(out, "tau^{p} = {text}");
                        } else if a != b && text != "0" {
                            let _ = writeln!(out, "tau^{p}_{}{} = {text}", a + 1, b + 1);
                        }
                    }
                }
            }
        }
        for c in &self.checks {
            if let Some(why) = &c.skipped {
                let _ = writeln!(out, "SKIP {} ({why})", c.id);
                continue;
            }
            for r in &c.residuals {
                let _ = writeln!(out, "  {r}");
            }
        }
        let _ = writeln!(
            out,
            "result: {} (exit {})",
            if self.passed { "PASS" } else { "FAIL" },
            self.exit_code
        );
        out
    }
}

/// Group element, window gate and tau table for a scenario, with random
/// draws repeated until every `tau^p(0)` is nonzero.
struct Resolved {
    spec: CliffordSpec,
    redraws: u64,
    stable: bool,
    table: Option<TauTable>,
    hierarchy: Option<Hierarchy>,
}

fn resolve(s: &Scenario) -> Result<Resolved> {
    s.validate()?;
    let ring = s.ring()?;
    let window = s.mode_window()?;
    let wider = s.wider_window()?;
    let p_range = (s.p_range[0], s.p_range[1]);
    let config = HierarchyConfig {
        z_max: s.z_max,
        k_trunc: s.k_trunc,
    };
    let random = s.clifford.random.is_some();
    let mut redraws = 0u64;
    loop {
        let spec = s.clifford_spec(redraws)?;
        if !window_stability_check(s.components, &ring, &spec, p_range, window, wider)? {
            return Ok(Resolved {
                spec,
                redraws,
                stable: false,
                table: None,
                hierarchy: None,
            });
        }
        let table = FockSpace::new(s.components, window, &ring)?.tau_table(p_range.0, p_range.1, &spec)?;
        match Hierarchy::new(table.clone(), config) {
            Ok(h) => {
                return Ok(Resolved {
                    spec,
                    redraws,
                    stable: true,
                    table: Some(table),
                    hierarchy: Some(h),
                })
            }
            Err(Error::NonNormalizable { .. }) if random && redraws < 256 => redraws += 1,
            Err(e) => return Err(e),
        }
    }
}

/// The tau table a scenario runs on (after any random redraws).
pub fn scenario_tau_table(s: &Scenario) -> Result<TauTable> {
    resolve(s)?.table.ok_or_else(|| {
        Error::window(
            format!("tau table changes between {} and {}", s.mode_window().unwrap(), s.wider_window().unwrap()),
            "a larger mode window",
        )
    })
}

/// Stability gate, tau table, then every selected check in id order.
pub fn run_scenario(s: &Scenario, negative: Option<NegativeControl>) -> Result<Report> {
    let Resolved {
        spec,
        redraws,
        stable,
        table,
        hierarchy,
    } = resolve(s)?;
    let (window, wider) = (s.mode_window()?, s.wider_window()?);
    let stability = Stability {
        window: [window.lo, window.hi],
        wider: [wider.lo, wider.hi],
        stable,
    };
    let mut report = Report {
        scenario: s.clone(),
        clifford: spec.to_text(),
        redraws,
        negative_control: None,
        stability,
        tau: table.as_ref().map(TauTable::to_json),
        checks: Vec::new(),
        passed: false,
        exit_code: ExitStatus::Unstable.code(),
    };
    let Some(mut h) = hierarchy else {
        return Ok(report);
    };
    if let Some(nc) = negative {
        let (h2, what) = apply_negative_control(h, nc)?;
        h = h2;
        report.negative_control = Some(what);
    }
    for id in s.selected_checks()? {
        let start = Instant::now();
        // A p-range too short for a check's operators skips that check only.
        let (residuals, skipped) = match run_check(&h, id) {
            Err(Error::Window { what, required }) => (Vec::new(), Some(format!("{what}; need {required}"))),
            other => other?,
        };
        report.checks.push(CheckReport {
            id: id.to_string(),
            passed: residuals.iter().all(Residual::passed),
            skipped,
            residuals,
            elapsed_ms: start.elapsed().as_millis() as u64,
        });
    }
    report.passed = report.checks.iter().all(|c| c.passed);
    report.exit_code = if report.passed { ExitStatus::Pass } else { ExitStatus::Residual }.code();
    Ok(report)
}

fn apply_negative_control(h: Hierarchy, nc: NegativeControl) -> Result<(Hierarchy, String)> {
    match nc {
        NegativeControl::EpsSign => {
            let n = h.components();
            let target = h.p_values().into_iter().find_map(|p| {
                (1..=n)
                    .flat_map(|a| (1..=n).map(move |b| (a, b)))
                    .find(|&(a, b)| a != b && !h.table().tau_ab(p, a, b).map_or(true, |t| t.is_zero()))
                    .map(|(a, b)| (p, a, b))
            });
            let (p, a, b) = target.ok_or_else(|| {
                Error::Config("eps-sign control needs a nonzero off-diagonal tau-function".into())
            })?;
            let signs: SignTable = h.signs().clone().with_flip(a, b, p);
            let h2 = Hierarchy::with_signs(h.table().clone(), h.config(), signs)?;
            Ok((h2, format!("eps-sign: flipped eps_{a}{b}(p={p})")))
        }
        NegativeControl::SchurCoefficient => {
            let p = h.p_values()[0];
            let c = SchurCorruption { p, alpha: 1, beta: 1, k: 1 };
            let h2 = h.with_schur_corruption(c)?;
            Ok((h2, format!("schur-coefficient: +1 on the z^-1 Miwa coefficient of tau^{p}")))
        }
    }
}

fn flows(h: &Hierarchy) -> Vec<Flow> {
    (1..=h.components()).map(Flow::Component).chain([Flow::Matrix]).collect()
}

fn max_flow_order(h: &Hierarchy) -> usize {
    2.min(h.k_trunc()).min(h.ring().max_order())
}

type CheckOutcome = (Vec<Residual>, Option<String>);

fn run_check(h: &Hierarchy, id: &str) -> Result<CheckOutcome> {
    let n = h.components();
    let dirs = [Direction::Psi, Direction::Adjoint];
    let mut out = Vec::new();
    // n ranges for the (t, t') identities: n <= min(D, Z_max) - 1 leaves at
    // least degree 0 exact.
    let n_max = 2.min((h.degree().min(h.z_max()) as usize).saturating_sub(1));
    match id {
        "antisymmetry" => out.push(first_coefficient_antisymmetry_check(h)?),
        "ba-constructions" => out.push(check_ba_constructions(h)?),
        "ba-pairing" => {
            for k in 0..=n_max {
                out.push(check_ba_bilinear_pairing(h, k)?);
            }
        }
        "bilinear" => {
            for k in 0..=n_max {
                for a in 1..=n {
                    for b in 1..=n {
                        out.push(check_bilinear_identity(h, k, a, b)?);
                    }
                }
            }
        }
        "eigenfunction" => out.push(check_eigenfunction(h)?),
        "flow" => {
            for m in 1..=max_flow_order(h) {
                for f in flows(h) {
                    for d in dirs {
                        out.push(check_flow_equation(h, f, m, d)?);
                    }
                }
            }
        }
        "flow-resolution" => {
            for m in 1..=max_flow_order(h) {
                out.push(check_flow_resolution(h, m)?);
            }
        }
        "hirota" => {
            if n < 2 {
                return Ok((out, Some("needs at least two components".into())));
            }
            for a in 1..=n {
                for b in (1..=n).filter(|&b| b != a) {
                    for g in (1..=n).filter(|&g| g != a && g != b) {
                        out.push(check_hirota(h, HirotaEquation::H8 { alpha: a, beta: b, gamma: g })?);
                    }
                    out.push(check_hirota(h, HirotaEquation::H9 { alpha: a, beta: b })?);
                    out.push(check_hirota(h, HirotaEquation::H10 { alpha: a, beta: b })?);
                    out.push(check_hirota(h, HirotaEquation::H11 { alpha: a, gamma: b })?);
                }
            }
        }
        "lax" => {
            for m in 1..=max_flow_order(h) {
                for f in flows(h) {
                    out.push(check_lax_equation(h, f, m)?);
                }
            }
        }
        "linear-components" => {
            for d in dirs {
                out.push(check_linear_problem_components(h, d)?);
            }
        }
        "linear-t1" => {
            for d in dirs {
                out.push(check_linear_problem_t1(h, d)?);
            }
        }
        "linear-tau" => out.push(check_linear_problem_tau(h)?),
        "sato" => {
            for m in 1..=max_flow_order(h) {
                for f in flows(h) {
                    out.push(check_sato_equation(h, f, m)?);
                }
            }
        }
        "wave-inverse" => out.extend(check_wave_inverse(h)?),
        "zero-curvature" => {
            if max_flow_order(h) < 2 {
                return Ok((out, Some("needs K_trunc >= 2 and K_t >= 2".into())));
            }
            out.push(check_zero_curvature(h)?);
        }
        other => return Err(Error::Config(format!("unknown check id `{other}`"))),
    }
    Ok((out, None))
}

/// The group element a scenario resolves to, after any redraws.
pub fn resolved_clifford(report: &Report) -> Result<CliffordSpec> {
    CliffordSpec::parse(&report.clifford)
}
