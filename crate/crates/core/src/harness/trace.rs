//! Plot-ready CSV traces. Values are written with 17 significant digits so a
//! parse of an emitted trace reproduces it exactly.

use crate::error::{Error, Result};
use crate::gap_tracker::GapRecord;
use crate::solvers_continuous::ContinuousRun;
use crate::vi_saddle::ViRow;

pub const HEADER: [&str; 9] = ["k", "A", "f_xhat", "U", "L", "G", "Ed", "scaled_gap", "theorem_bound"];
pub const VI_EXTRA: [&str; 2] = ["saddle_gap", "probe_gap"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    K(usize),
    T(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub step: Step,
    /// A^(k), or α(t) for continuous runs.
    pub a_total: f64,
    pub f_xhat: Option<f64>,
    pub upper: f64,
    pub lower: f64,
    pub gap: f64,
    pub ed: Option<f64>,
    pub scaled_gap: f64,
    pub theorem_bound: f64,
    /// (saddle_gap, probe_gap) for operator runs.
    pub vi: Option<(Option<f64>, f64)>,
}

impl TraceRow {
    /// Iteration count or time, as a float for fitting.
    pub fn x(&self) -> f64 {
        match self.step {
            Step::K(k) => k as f64,
            Step::T(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn from_records(records: &[GapRecord], vi_rows: Option<&[ViRow]>) -> Self {
        let rows = records
            .iter()
            .enumerate()
            .map(|(i, r)| TraceRow {
                step: Step::K(r.k),
                a_total: r.a_total,
                f_xhat: r.f_xhat,
                upper: r.upper,
                lower: r.lower,
                gap: r.gap,
                ed: r.ed,
                scaled_gap: r.scaled_gap,
                theorem_bound: r.theorem_bound,
                vi: vi_rows.map(|v| (v[i].saddle_gap, v[i].probe_gap)),
            })
            .collect();
        Trace { rows }
    }

    pub fn from_continuous(run: &ContinuousRun) -> Self {
        let g0 = run.trace[0].scaled_gap;
        let rows = run
            .trace
            .iter()
            .map(|p| TraceRow {
                step: Step::T(p.t),
                a_total: p.alpha,
                f_xhat: Some(p.f_xhat),
                upper: p.upper,
                lower: p.lower,
                gap: p.gap,
                ed: None,
                scaled_gap: p.scaled_gap,
                theorem_bound: g0 / p.alpha,
                vi: None,
            })
            .collect();
        Trace { rows }
    }

    fn is_continuous(&self) -> bool {
        matches!(self.rows.first().map(|r| r.step), Some(Step::T(_)))
    }

    pub fn emit(&self) -> Result<String> {
        let vi = self.rows.first().is_some_and(|r| r.vi.is_some());
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<&str> = HEADER.to_vec();
        if self.is_continuous() {
            header[0] = "t";
        }
        if vi {
            header.extend(VI_EXTRA);
        }
        w.write_record(&header).map_err(io)?;
        for r in &self.rows {
            let mut rec = vec![
                match r.step {
                    Step::K(k) => k.to_string(),
                    Step::T(t) => num(t),
                },
                num(r.a_total),
                opt(r.f_xhat),
                num(r.upper),
                num(r.lower),
                num(r.gap),
                opt(r.ed),
                num(r.scaled_gap),
                num(r.theorem_bound),
            ];
            if let Some((s, p)) = r.vi {
                rec.push(opt(s));
                rec.push(num(p));
            }
            w.write_record(&rec).map_err(io)?;
        }
        String::from_utf8(w.into_inner().map_err(|e| Error::Io(e.to_string()))?).map_err(|e| Error::Io(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let header: Vec<String> = r.headers().map_err(io)?.iter().map(str::to_string).collect();
        let continuous = header.first().map(String::as_str) == Some("t");
        let mut expected: Vec<&str> = HEADER.to_vec();
        if continuous {
            expected[0] = "t";
        }
        let vi = header.len() == HEADER.len() + VI_EXTRA.len();
        if vi {
            expected.extend(VI_EXTRA);
        }
        if header != expected {
            return Err(Error::DegenerateTrace(format!("unexpected header {header:?}")));
        }
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(io)?;
            let f = |i: usize| -> Result<f64> {
                rec[i].parse::<f64>().map_err(|_| Error::DegenerateTrace(format!("bad number `{}`", &rec[i])))
            };
            let o = |i: usize| -> Result<Option<f64>> { if rec[i].is_empty() { Ok(None) } else { f(i).map(Some) } };
            let step = if continuous {
                Step::T(f(0)?)
            } else {
                Step::K(rec[0].parse().map_err(|_| Error::DegenerateTrace(format!("bad step `{}`", &rec[0])))?)
            };
            rows.push(TraceRow {
                step,
                a_total: f(1)?,
                f_xhat: o(2)?,
                upper: f(3)?,
                lower: f(4)?,
                gap: f(5)?,
                ed: o(6)?,
                scaled_gap: f(7)?,
                theorem_bound: f(8)?,
                vi: if vi { Some((o(9)?, f(10)?)) } else { None },
            });
        }
        Ok(Trace { rows })
    }
}

fn io(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}
