//! CSV readers and writers for the tool's file formats.
//!
//! Readers locate columns by header name and ignore extra columns. Writers
//! emit LF line endings and 6-significant-digit numbers unless noted.

use std::io::{Read, Write};

use crate::control::SensorSample;
use crate::emg::EmgTrace;
use crate::error::{Result, TwinError};
use crate::numfmt::sig6;
use crate::sim::SimLog;

pub const CHARACTERIZATION_HEADER: [&str; 2] = ["voltage_v", "peak_force_n"];
pub const SENSOR_HEADER: [&str; 3] = ["t_s", "s1_volts", "s2_volts"];
pub const CONTROL_HEADER: [&str; 5] = ["t_s", "mode", "command", "v_cmd_volts", "duty"];
pub const SIMLOG_HEADER: [&str; 12] = [
    "t_s",
    "s1_volts",
    "s2_volts",
    "mode",
    "v_cmd_volts",
    "duty",
    "i_coil_a",
    "f_clutch_n",
    "f_support_n",
    "f_required_n",
    "f_muscle_residual_n",
    "p_clutch_w",
];

/// Relative tolerance on sample spacing when inferring an EMG rate.
const SPACING_TOL: f64 = 1e-6;

struct Table {
    header: Vec<String>,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn read(input: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let mut rows = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                parse_err(line, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            rows.push((line, rec.iter().map(str::to_owned).collect()));
        }
        Ok(Self { header, rows })
    }

    fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| parse_err(1, format!("missing column '{name}'")))
    }

    fn number(&self, row: usize, col: usize) -> Result<f64> {
        let (line, fields) = &self.rows[row];
        let text = &fields[col];
        let v: f64 = text
            .parse()
            .map_err(|_| parse_err(*line, format!("'{}': not a number: '{text}'", self.header[col])))?;
        if !v.is_finite() {
            return Err(parse_err(*line, format!("'{}': non-finite value", self.header[col])));
        }
        Ok(v)
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> TwinError {
    TwinError::Parse {
        line,
        reason: reason.into(),
    }
}

/// Writes a header line and rows of preformatted fields.
pub fn write_table<W: Write, S: AsRef<str>>(
    mut out: W,
    header: &[&str],
    rows: impl IntoIterator<Item = Vec<S>>,
) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let fields: Vec<&str> = row.iter().map(AsRef::as_ref).collect();
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}

/// `(voltage, peak force)` samples.
pub fn read_characterization(input: impl Read) -> Result<Vec<(f64, f64)>> {
    let t = Table::read(input)?;
    let (cv, cf) = (t.column(CHARACTERIZATION_HEADER[0])?, t.column(CHARACTERIZATION_HEADER[1])?);
    (0..t.rows.len()).map(|i| Ok((t.number(i, cv)?, t.number(i, cf)?))).collect()
}

pub fn read_sensor_trace(input: impl Read, v_ref: f64) -> Result<Vec<SensorSample>> {
    let t = Table::read(input)?;
    let cols = [t.column(SENSOR_HEADER[0])?, t.column(SENSOR_HEADER[1])?, t.column(SENSOR_HEADER[2])?];
    let mut out: Vec<SensorSample> = Vec::with_capacity(t.rows.len());
    for i in 0..t.rows.len() {
        let line = t.rows[i].0;
        let ts = t.number(i, cols[0])?;
        if out.last().is_some_and(|p| ts <= p.t) {
            return Err(parse_err(line, "t_s must be strictly increasing"));
        }
        let s = SensorSample::new(ts, t.number(i, cols[1])?, t.number(i, cols[2])?, v_ref)
            .map_err(|e| parse_err(line, e.to_string()))?;
        out.push(s);
    }
    Ok(out)
}

/// One trace per non-time column; the rate comes from the `t_s` spacing,
/// which must be uniform.
pub fn read_emg(input: impl Read) -> Result<Vec<EmgTrace>> {
    let t = Table::read(input)?;
    let ct = t.column("t_s")?;
    if t.rows.len() < 2 {
        return Err(parse_err(1, "need at least two samples to infer the rate"));
    }
    let times: Vec<f64> = (0..t.rows.len()).map(|i| t.number(i, ct)).collect::<Result<_>>()?;
    let n = times.len();
    let step = (times[n - 1] - times[0]) / (n - 1) as f64;
    if !(step > 0.0) {
        return Err(parse_err(t.rows[1].0, "t_s must be increasing"));
    }
    for (i, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - step).abs() > SPACING_TOL * step.max(1.0) + 1e-9 * step {
            return Err(parse_err(t.rows[i + 1].0, "t_s spacing is not uniform"));
        }
    }
    let rate = 1.0 / step;
    t.header
        .iter()
        .enumerate()
        .filter(|&(c, _)| c != ct)
        .map(|(c, label)| {
            let samples = (0..n).map(|i| t.number(i, c)).collect::<Result<Vec<_>>>()?;
            EmgTrace::new(samples, rate, label.as_str())
        })
        .collect()
}

/// Rows of the control trace: time, mode, command, commanded volts, duty.
pub fn write_control_trace<W: Write>(out: W, rows: &[(f64, &str, &str, f64, f64)]) -> Result<()> {
    write_table(
        out,
        &CONTROL_HEADER,
        rows.iter()
            .map(|&(t, mode, cmd, v, d)| vec![sig6(t), mode.to_owned(), cmd.to_owned(), sig6(v), sig6(d)]),
    )
}

pub fn write_simlog<W: Write>(out: W, log: &SimLog) -> Result<()> {
    write_table(
        out,
        &SIMLOG_HEADER,
        log.records.iter().map(|r| {
            vec![
                sig6(r.t),
                sig6(r.s1),
                sig6(r.s2),
                r.mode.as_str().to_owned(),
                sig6(r.v_cmd),
                sig6(r.duty),
                sig6(r.i_coil),
                sig6(r.f_clutch),
                sig6(r.f_support),
                sig6(r.f_required),
                sig6(r.f_muscle_residual),
                sig6(r.p_clutch),
            ]
        }),
    )
}
