use std::f64::consts::PI;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use poisson_audit_core::flat::{FlatCleanReport, FlatLengthEntry, ValidationReport};
use poisson_audit_core::lens::{GeodesicComponent, LengthKind, LensSpace};
use poisson_audit_core::morse::MorseBreakdown;
use poisson_audit_core::oracle::{CleanlinessReport, PeakReport};
use poisson_audit_core::wavetrace::{Decision, DensityScalar, SearchReport, WaveTermSum};

/// A report that can be written as JSON or CSV.
pub trait Render: Serialize {
    fn csv(&self) -> String;

    /// Whether the report contains a notable finding (exit code 2).
    fn notable(&self) -> bool {
        false
    }
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(" ")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComponentReport {
    pub component: GeodesicComponent,
    pub morse: MorseBreakdown,
    pub dg: DensityScalar,
    /// `None` for iterated (winding > 0) components.
    pub primitive: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LengthReport {
    pub tau_index: u64,
    pub tau: f64,
    pub kind: LengthKind,
    pub components: Vec<ComponentReport>,
    /// Morse data of the whole unit tangent bundle at full lengths.
    pub full_index: Option<MorseBreakdown>,
    pub leading_sum: WaveTermSum,
    pub decision: Decision,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LensAnalysis {
    pub lens: LensSpace,
    pub max_winding: u32,
    pub lengths: Vec<LengthReport>,
    pub zero_count: usize,
}

impl Render for LensAnalysis {
    fn csv(&self) -> String {
        let mut s = String::from(
            "tau_index,tau,kind,l,winding,class,orientation,dim,morse_total,dg,amplitude,decision\n",
        );
        for r in &self.lengths {
            let (kind, l, w) = match r.kind {
                LengthKind::Short { l, winding } => ("short", l, winding),
                LengthKind::Full { multiple } => ("full", 0, multiple),
            };
            if r.components.is_empty() {
                let total = r.full_index.map(|m| m.total).unwrap_or(0);
                let _ = writeln!(
                    s,
                    "{},{},{kind},{l},{w},,,{},{total},,,{}",
                    r.tau_index,
                    r.tau,
                    4 * self.lens.n() - 3,
                    decision_str(r.decision)
                );
            }
            for c in &r.components {
                let amp = r
                    .leading_sum
                    .terms
                    .iter()
                    .find(|t| {
                        t.class == c.component.class_index
                            && t.orientation == c.component.orientation
                    })
                    .map(|t| (t.sign as f64 * t.amplitude_float).to_string())
                    .unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{},{},{kind},{l},{w},{},{},{},{},{},{amp},{}",
                    r.tau_index,
                    r.tau,
                    c.component.class_index,
                    c.component.orientation,
                    c.component.dim,
                    c.morse.total,
                    c.dg.float_value,
                    decision_str(r.decision),
                );
            }
        }
        s
    }

    fn notable(&self) -> bool {
        self.zero_count > 0
    }
}

fn decision_str(d: Decision) -> &'static str {
    match d {
        Decision::Nonzero => "NONZERO",
        Decision::Zero => "ZERO",
    }
}

impl Render for SearchReport {
    fn csv(&self) -> String {
        let mut s = String::from("q,p,l,winding,tau,decision\n");
        for f in &self.findings {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                f.q,
                join(&f.p),
                f.l,
                f.winding,
                f.tau,
                decision_str(f.decision)
            );
        }
        s
    }

    fn notable(&self) -> bool {
        !self.findings.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaRow {
    pub q: u32,
    pub p: i64,
    /// The identity vanishes for every `l`.
    pub holds: bool,
    /// `l` values where it vanishes.
    pub vanishing_l: Vec<u32>,
    pub p_is_plus_minus_one: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaTable {
    pub q_max: u32,
    pub rows: Vec<LemmaRow>,
    pub mismatches: usize,
}

impl Render for LemmaTable {
    fn csv(&self) -> String {
        let mut s = String::from("q,p,holds,p_is_plus_minus_one,vanishing_l\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.q,
                r.p,
                r.holds,
                r.p_is_plus_minus_one,
                join(&r.vanishing_l)
            );
        }
        s
    }

    fn notable(&self) -> bool {
        self.mismatches > 0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: f64,
    pub re: f64,
    pub im: f64,
    pub abs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSeries {
    pub epsilon: f64,
    pub points: Vec<TracePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub lens: LensSpace,
    pub cutoff: usize,
    pub grid_points: usize,
    pub traces: Vec<TraceSeries>,
    pub peak_report: PeakReport,
}

impl Render for TraceReport {
    fn csv(&self) -> String {
        let mut s = String::from("epsilon,t,re,im,abs\n");
        for series in &self.traces {
            for p in &series.points {
                let _ = writeln!(s, "{},{},{},{},{}", series.epsilon, p.t, p.re, p.im, p.abs);
            }
        }
        s
    }
}

/// Predicted singular support in `(0, 2 pi]`: `2 pi N / q`, `N = 1..=q`.
pub fn predicted_lengths(q: u32) -> Vec<f64> {
    (1..=q).map(|n| 2.0 * PI * n as f64 / q as f64).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatAnalysis {
    pub validation: ValidationReport,
    pub max_length: f64,
    pub lengths: Vec<FlatLengthEntry>,
    pub cleanliness: Vec<FlatCleanReport>,
}

impl Render for FlatAnalysis {
    fn csv(&self) -> String {
        let mut s =
            String::from("length_squared,length_float,B_index,fix_dim,count,decision,clean\n");
        for (e, c) in self.lengths.iter().zip(&self.cleanliness) {
            for g in &e.components {
                let clean = c
                    .entries
                    .iter()
                    .find(|x| x.coset == g.coset)
                    .is_some_and(|x| x.pass);
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{clean}",
                    poisson_audit_core::exactnum::format_rational(&e.length_squared),
                    e.length_float,
                    g.coset,
                    g.fix_dim,
                    g.count,
                    decision_str(e.decision),
                );
            }
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgRow {
    pub class: usize,
    pub orientation: String,
    pub m: usize,
    pub closed_form: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DgReport {
    pub lens: LensSpace,
    pub l: u32,
    pub winding: u32,
    pub tau: f64,
    pub rows: Vec<DgRow>,
    pub max_relative_error: f64,
}

impl Render for DgReport {
    fn csv(&self) -> String {
        let mut s = String::from("class,orientation,m,closed_form,numeric,relative_error\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.class, r.orientation, r.m, r.closed_form, r.numeric, r.relative_error
            );
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanRow {
    pub class: usize,
    pub orientation: String,
    pub report: CleanlinessReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleanReport {
    pub lens: LensSpace,
    pub l: u32,
    pub winding: u32,
    pub rows: Vec<CleanRow>,
    pub pass: bool,
}

impl Render for CleanReport {
    fn csv(&self) -> String {
        let mut s = String::from(
            "class,orientation,samples,expected_nullity,nullities,graph_residual,inconclusive,pass\n",
        );
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{}",
                r.class,
                r.orientation,
                r.report.samples,
                r.report.expected_nullity,
                join(&r.report.nullities),
                r.report.graph_residual,
                r.report.inconclusive,
                r.report.pass
            );
        }
        s
    }
}
