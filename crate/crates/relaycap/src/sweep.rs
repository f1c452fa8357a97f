//! SNR sweeps of the capacity bounds with CSV and self-contained SVG output.
//!
//! Grid points are evaluated concurrently; outputs are assembled strictly in
//! grid order and every Monte-Carlo seed is derived from (seed, point index),
//! so repeated runs emit byte-identical files regardless of thread count.

use crate::capacity_bounds::{
    c_iid_upper, df_lower, miso_beam_select_lower, relay_miso_upper, BoundId, BoundPoint,
};
use crate::fading_number::{classify_regime, FadingNumberReport};
use crate::qpsk_mi::{
    df_qpsk_lower_detailed, miso_qpsk_lower, default_delta_grid, McConfig,
};
use crate::search::SearchConfig;
use crate::spectral::ChannelScenario;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;
use std::io::Write;

/// Everything one sweep needs: scenario, grid, bound selection, and the
/// optimizer/sampler configurations.
#[derive(Debug, Clone)]
pub struct SweepRequest {
    pub scenario: ChannelScenario,
    /// Human-readable scenario label for the SVG title.
    pub scenario_label: String,
    pub snr_db_min: f64,
    pub snr_db_max: f64,
    pub points: usize,
    pub bounds: BTreeSet<BoundId>,
    pub search: SearchConfig,
    pub mc: McConfig,
    pub delta_grid: Vec<f64>,
}

impl SweepRequest {
    /// Default full-bound sweep over the benchmark axis −10…90 dB.
    pub fn new(scenario: ChannelScenario, label: impl Into<String>) -> Self {
        Self {
            scenario,
            scenario_label: label.into(),
            snr_db_min: -10.0,
            snr_db_max: 90.0,
            points: 21,
            bounds: BoundId::ALL.into_iter().collect(),
            search: SearchConfig::default(),
            mc: McConfig::default(),
            delta_grid: default_delta_grid(),
        }
    }

    fn validate(&self) -> Result<(), SweepError> {
        if self.points == 0 {
            return Err(SweepError::InvalidRequest("points must be >= 1".into()));
        }
        if self.points == 1 {
            if self.snr_db_min != self.snr_db_max {
                return Err(SweepError::InvalidRequest(
                    "a single-point sweep needs min == max".into(),
                ));
            }
        } else if !(self.snr_db_min < self.snr_db_max) {
            return Err(SweepError::InvalidRequest(
                "snr range needs min < max".into(),
            ));
        }
        if self.bounds.is_empty() {
            return Err(SweepError::InvalidRequest(
                "at least one bound must be selected".into(),
            ));
        }
        Ok(())
    }

    /// The dB grid, strictly increasing (or a single point).
    pub fn grid_db(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.snr_db_min];
        }
        (0..self.points)
            .map(|i| {
                self.snr_db_min
                    + (self.snr_db_max - self.snr_db_min) * i as f64 / (self.points - 1) as f64
            })
            .collect()
    }
}

/// dB → linear SNR; the only place the conversion happens.
pub fn snr_db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepError {
    InvalidRequest(String),
    /// Every grid point of some selected bound failed.
    BoundFailedEverywhere(BoundId),
    Io(String),
}

impl fmt::Display for SweepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidRequest(msg) => write!(f, "invalid sweep request: {msg}"),
            Self::BoundFailedEverywhere(id) => {
                write!(f, "bound {id} failed at every grid point")
            }
            Self::Io(msg) => write!(f, "sweep output: {msg}"),
        }
    }
}

impl std::error::Error for SweepError {}

/// Per-SNR evaluations of each requested bound, plus failure notes.
#[derive(Debug, Clone)]
pub struct BoundSweep {
    pub scenario: ChannelScenario,
    pub snr_grid_db: Vec<f64>,
    /// One entry per selected bound, each with one slot per grid point.
    pub points: Vec<(BoundId, Vec<Option<BoundPoint>>)>,
    /// Human-readable warnings for failed points.
    pub warnings: Vec<String>,
    pub fading_numbers: FadingNumberReport,
    pub scenario_label: String,
}

impl BoundSweep {
    pub fn column(&self, id: BoundId) -> Option<&[Option<BoundPoint>]> {
        self.points
            .iter()
            .find(|(b, _)| *b == id)
            .map(|(_, v)| v.as_slice())
    }

    fn value_at(&self, id: BoundId, idx: usize) -> Option<f64> {
        self.column(id)
            .and_then(|col| col.get(idx))
            .and_then(|p| p.as_ref())
            .map(|p| p.value_nats)
    }

    /// Pointwise max of the decode-and-forward bounds (optimized and QPSK).
    pub fn df_combined(&self, idx: usize) -> Option<f64> {
        combine_max(self.value_at(BoundId::DfLower, idx), self.value_at(BoundId::DfQpskLower, idx))
    }

    /// Pointwise max of the MISO lower bounds (beam selection and QPSK).
    pub fn miso_combined(&self, idx: usize) -> Option<f64> {
        combine_max(
            self.value_at(BoundId::MisoBeamSelectLower, idx),
            self.value_at(BoundId::MisoQpskLower, idx),
        )
    }
}

fn combine_max(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (Some(x), None) => Some(x),
        (None, Some(y)) => Some(y),
        (None, None) => None,
    }
}

/// Runs the sweep. Per-point failures become `None` slots plus a warning;
/// a bound that fails at every point is an error.
pub fn run_sweep(req: &SweepRequest) -> Result<BoundSweep, SweepError> {
    req.validate()?;
    let grid = req.grid_db();
    let bounds: Vec<BoundId> = req.bounds.iter().copied().collect();

    struct PointResult {
        idx: usize,
        per_bound: Vec<(BoundId, Result<BoundPoint, String>)>,
    }

    let results: Vec<PointResult> = grid
        .par_iter()
        .enumerate()
        .map(|(idx, &db)| {
            let snr = snr_db_to_linear(db);
            let mc = McConfig {
                seed: req
                    .mc
                    .seed
                    .wrapping_add((idx as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
                ..req.mc
            };
            let per_bound = bounds
                .iter()
                .map(|&id| {
                    let r: Result<BoundPoint, String> = match id {
                        BoundId::DirectUpper => {
                            c_iid_upper(snr, &req.search).map_err(|e| e.to_string())
                        }
                        BoundId::RelayMisoUpper => {
                            relay_miso_upper(&req.scenario, snr, &req.search)
                                .map_err(|e| e.to_string())
                        }
                        BoundId::DfLower => {
                            df_lower(&req.scenario, snr, &req.search).map_err(|e| e.to_string())
                        }
                        BoundId::MisoBeamSelectLower => {
                            miso_beam_select_lower(&req.scenario, snr, &req.search)
                                .map_err(|e| e.to_string())
                        }
                        BoundId::MisoQpskLower => miso_qpsk_lower(&req.scenario, snr, &mc)
                            .map(|est| BoundPoint {
                                snr,
                                value_nats: est.value.max(0.0),
                                optimizer_args: vec![
                                    ("raw_objective".into(), est.value),
                                    ("std_error".into(), est.std_error),
                                    ("samples".into(), est.samples_used as f64),
                                ],
                                bound_id: id,
                            })
                            .map_err(|e| e.to_string()),
                        BoundId::DfQpskLower => {
                            df_qpsk_lower_detailed(&req.scenario, snr, &mc, &req.delta_grid)
                                .map(|(est, delta)| BoundPoint {
                                    snr,
                                    value_nats: est.value.max(0.0),
                                    optimizer_args: vec![
                                        ("delta".into(), delta),
                                        ("raw_objective".into(), est.value),
                                        ("std_error".into(), est.std_error),
                                        ("samples".into(), est.samples_used as f64),
                                    ],
                                    bound_id: id,
                                })
                                .map_err(|e| e.to_string())
                        }
                    };
                    (id, r)
                })
                .collect();
            PointResult { idx, per_bound }
        })
        .collect();

    let mut columns: Vec<(BoundId, Vec<Option<BoundPoint>>)> = bounds
        .iter()
        .map(|&b| (b, vec![None; grid.len()]))
        .collect();
    let mut warnings = Vec::new();
    for pr in results {
        for (id, outcome) in pr.per_bound {
            let slot = columns
                .iter_mut()
                .find(|(b, _)| *b == id)
                .expect("column exists");
            match outcome {
                Ok(p) => slot.1[pr.idx] = Some(p),
                Err(msg) => warnings.push(format!(
                    "{} at {:.2} dB: {msg}",
                    id,
                    grid[pr.idx]
                )),
            }
        }
    }
    for (id, col) in &columns {
        if col.iter().all(Option::is_none) {
            return Err(SweepError::BoundFailedEverywhere(*id));
        }
    }
    Ok(BoundSweep {
        scenario: req.scenario.clone(),
        snr_grid_db: grid,
        points: columns,
        warnings,
        fading_numbers: classify_regime(&req.scenario),
        scenario_label: req.scenario_label.clone(),
    })
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

pub const CSV_HEADER: &str = "snr_db,direct_upper,relay_miso_upper,df_lower,df_qpsk_lower,\
                              df_lower_combined,miso_beamselect_lower,miso_qpsk_lower,\
                              miso_lower_combined";

/// Writes the sweep as CSV: fixed header, values in nats with 9 significant
/// digits, empty cells for unselected bounds and failed points.
pub fn write_csv<W: Write>(sweep: &BoundSweep, mut w: W) -> Result<(), SweepError> {
    let fmt_cell = |v: Option<f64>| -> String {
        match v {
            Some(x) => format!("{x:.8e}"),
            None => String::new(),
        }
    };
    writeln!(w, "{}", CSV_HEADER.replace(' ', "")).map_err(io_err)?;
    for (i, db) in sweep.snr_grid_db.iter().enumerate() {
        let cells = [
            sweep.value_at(BoundId::DirectUpper, i),
            sweep.value_at(BoundId::RelayMisoUpper, i),
            sweep.value_at(BoundId::DfLower, i),
            sweep.value_at(BoundId::DfQpskLower, i),
            sweep.df_combined(i),
            sweep.value_at(BoundId::MisoBeamSelectLower, i),
            sweep.value_at(BoundId::MisoQpskLower, i),
            sweep.miso_combined(i),
        ];
        let row: Vec<String> = cells.iter().map(|&c| fmt_cell(c)).collect();
        writeln!(w, "{:.4},{}", db, row.join(",")).map_err(io_err)?;
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> SweepError {
    SweepError::Io(e.to_string())
}

// ---------------------------------------------------------------------------
// SVG
// ---------------------------------------------------------------------------

const PLOT_W: f64 = 860.0;
const PLOT_H: f64 = 560.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 240.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 55.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    dash: Option<&'a str>,
    data: Vec<(f64, f64)>,
}

/// Renders capacity-versus-SNR curves with two horizontal reference lines at
/// the fading-number values. Pure text output, no external assets.
pub fn write_svg<W: Write>(sweep: &BoundSweep, mut w: W) -> Result<(), SweepError> {
    let grid = &sweep.snr_grid_db;
    let collect = |f: &dyn Fn(usize) -> Option<f64>| -> Vec<(f64, f64)> {
        grid.iter()
            .enumerate()
            .filter_map(|(i, &db)| f(i).map(|v| (db, v)))
            .collect()
    };

    let mut series: Vec<Series> = Vec::new();
    let have = |id: BoundId| sweep.column(id).is_some();
    if have(BoundId::RelayMisoUpper) {
        series.push(Series {
            label: "Upper bound TRC-MISO",
            color: "#1f4e9c",
            dash: None,
            data: collect(&|i| sweep.value_at(BoundId::RelayMisoUpper, i)),
        });
    }
    if have(BoundId::MisoBeamSelectLower) || have(BoundId::MisoQpskLower) {
        series.push(Series {
            label: "Lower bound TRC-MISO",
            color: "#2f8f2f",
            dash: None,
            data: collect(&|i| sweep.miso_combined(i)),
        });
    }
    if have(BoundId::DfLower) || have(BoundId::DfQpskLower) {
        series.push(Series {
            label: "Lower bound relay (DF)",
            color: "#c23b22",
            dash: None,
            data: collect(&|i| sweep.df_combined(i)),
        });
    }
    if have(BoundId::DirectUpper) {
        series.push(Series {
            label: "Upper bound direct",
            color: "#8a5fb0",
            dash: Some("6,4"),
            data: collect(&|i| sweep.value_at(BoundId::DirectUpper, i)),
        });
    }

    let fn_miso = sweep.fading_numbers.chi2.max(sweep.fading_numbers.chi3);
    let fn_relay = sweep.fading_numbers.lower;

    let x_min = *grid.first().expect("nonempty grid");
    let x_max = *grid.last().expect("nonempty grid");
    let x_span = if x_max > x_min { x_max - x_min } else { 1.0 };
    let mut y_max = fn_miso.max(1.0);
    let mut y_min = 0.0f64;
    for s in &series {
        for &(_, v) in &s.data {
            y_max = y_max.max(v);
            y_min = y_min.min(v);
        }
    }
    y_max = (y_max * 1.08).ceil();
    let y_span = y_max - y_min;

    let x_of = |db: f64| MARGIN_L + (db - x_min) / x_span * (PLOT_W - MARGIN_L - MARGIN_R);
    let y_of = |v: f64| PLOT_H - MARGIN_B - (v - y_min) / y_span * (PLOT_H - MARGIN_T - MARGIN_B);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{PLOT_W}\" height=\"{PLOT_H}\" \
         viewBox=\"0 0 {PLOT_W} {PLOT_H}\">\n"
    ));
    out.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    out.push_str(&format!(
        "<text x=\"{}\" y=\"22\" font-family=\"sans-serif\" font-size=\"15\" \
         text-anchor=\"middle\">Capacity bounds, {}</text>\n",
        MARGIN_L + (PLOT_W - MARGIN_L - MARGIN_R) / 2.0,
        xml_escape(&sweep.scenario_label)
    ));

    // axes and ticks
    out.push_str(&format!(
        "<rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{}\" height=\"{}\" fill=\"none\" \
         stroke=\"black\"/>\n",
        PLOT_W - MARGIN_L - MARGIN_R,
        PLOT_H - MARGIN_T - MARGIN_B
    ));
    let x_tick = nice_step(x_span, 10);
    let mut t = (x_min / x_tick).ceil() * x_tick;
    while t <= x_max + 1e-9 {
        let x = x_of(t);
        out.push_str(&format!(
            "<line x1=\"{x:.2}\" y1=\"{}\" x2=\"{x:.2}\" y2=\"{}\" stroke=\"black\"/>\n",
            PLOT_H - MARGIN_B,
            PLOT_H - MARGIN_B + 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{x:.2}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"middle\">{t:.0}</text>\n",
            PLOT_H - MARGIN_B + 20.0
        ));
        t += x_tick;
    }
    let y_tick = nice_step(y_span, 8);
    let mut t = (y_min / y_tick).ceil() * y_tick;
    while t <= y_max + 1e-9 {
        let y = y_of(t);
        out.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y:.2}\" x2=\"{MARGIN_L}\" y2=\"{y:.2}\" stroke=\"black\"/>\n",
            MARGIN_L - 5.0
        ));
        out.push_str(&format!(
            "<text x=\"{}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\" \
             text-anchor=\"end\">{t:.1}</text>\n",
            MARGIN_L - 9.0,
            y + 4.0
        ));
        t += y_tick;
    }
    out.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\">SNR [dB]</text>\n",
        MARGIN_L + (PLOT_W - MARGIN_L - MARGIN_R) / 2.0,
        PLOT_H - 12.0
    ));
    out.push_str(&format!(
        "<text x=\"18\" y=\"{}\" font-family=\"sans-serif\" font-size=\"13\" \
         text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">Capacity [nats/channel use]</text>\n",
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0,
        (MARGIN_T + PLOT_H - MARGIN_B) / 2.0
    ));

    // fading-number reference lines
    for (value, label, color) in [
        (fn_miso, "Fading number TRC-MISO", "#2f8f2f"),
        (fn_relay, "Fading number relay (lower bound)", "#c23b22"),
    ] {
        if value >= y_min && value <= y_max {
            let y = y_of(value);
            out.push_str(&format!(
                "<line x1=\"{MARGIN_L}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
                 stroke=\"{color}\" stroke-dasharray=\"2,5\" stroke-width=\"1.2\"/>\n",
                PLOT_W - MARGIN_R
            ));
            series.push(Series {
                label,
                color,
                dash: Some("2,5"),
                data: Vec::new(),
            });
        }
    }

    for s in series.iter().filter(|s| !s.data.is_empty()) {
        let pts: Vec<String> = s
            .data
            .iter()
            .map(|&(db, v)| format!("{:.2},{:.2}", x_of(db), y_of(v)))
            .collect();
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        out.push_str(&format!(
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.8\"{dash}/>\n",
            pts.join(" "),
            s.color
        ));
    }

    // legend
    let lx = PLOT_W - MARGIN_R + 16.0;
    let mut ly = MARGIN_T + 12.0;
    for s in &series {
        let dash = s
            .dash
            .map(|d| format!(" stroke-dasharray=\"{d}\""))
            .unwrap_or_default();
        out.push_str(&format!(
            "<line x1=\"{lx}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"{}\" \
             stroke-width=\"1.8\"{dash}/>\n",
            lx + 26.0,
            s.color
        ));
        out.push_str(&format!(
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"12\">{}</text>\n",
            lx + 32.0,
            ly + 4.0,
            xml_escape(s.label)
        ));
        ly += 20.0;
    }
    out.push_str("</svg>\n");
    w.write_all(out.as_bytes()).map_err(io_err)
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn nice_step(span: f64, target_ticks: usize) -> f64 {
    let raw = span / target_ticks as f64;
    let mag = 10f64.powf(raw.log10().floor());
    for m in [1.0, 2.0, 5.0, 10.0] {
        if m * mag >= raw {
            return m * mag;
        }
    }
    10.0 * mag
}
