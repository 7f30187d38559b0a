//! CSV tables for evolutions, measure series, curves and sampled drivers.

use std::io::{Read, Write};

use num_complex::Complex64;

use crate::curve::Curve;
use crate::driving::SampledDriving;
use crate::error::{Error, Result};
use crate::evolution::EvolutionResult;
use crate::measure::MeasureSeries;
use crate::verify::Table;

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Columns `t, lambda, f1, f2, tip_re, tip_im`; tip columns are empty when no trace was computed.
pub fn write_evolution<W: Write>(result: &EvolutionResult, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "lambda", "f1", "f2", "tip_re", "tip_im"])?;
    for (j, t) in result.times().iter().enumerate() {
        let (re, im) = match result.tip.get(j) {
            Some(z) => (num(z.re), num(z.im)),
            None => (String::new(), String::new()),
        };
        w.write_record([
            num(*t),
            num(result.lambda[j]),
            num(result.f1[j]),
            num(result.f2[j]),
            re,
            im,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_measure_series<W: Write>(series: &MeasureSeries, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["t", "m1", "m2", "ratio"])?;
    for k in 0..series.len() {
        w.write_record([
            num(series.times[k]),
            num(series.m1[k]),
            num(series.m2[k]),
            num(series.ratio[k]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `x, y`, starting with the origin.
pub fn write_curve<W: Write>(curve: &Curve, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(["x", "y"])?;
    for p in curve.points() {
        w.write_record([num(p.re), num(p.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `x, y` rows (with a header) and validates them as a [`Curve`].
pub fn read_curve<R: Read>(input: R) -> Result<Curve> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut points = Vec::new();
    for (k, record) in r.records().enumerate() {
        let record = record?;
        if record.len() != 2 {
            return Err(Error::Parse(format!(
                "curve row {} has {} fields, expected 2",
                k + 1,
                record.len()
            )));
        }
        let field = |i: usize| -> Result<f64> {
            record[i]
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("curve row {}: {e}", k + 1)))
        };
        points.push(Complex64::new(field(0)?, field(1)?));
    }
    Curve::new(points)
}

/// Columns `t, lambda, s` for a zipped curve: capacity time, driving value and arclength.
pub fn write_sampled_driving<W: Write>(
    driving: &SampledDriving,
    curve: &Curve,
    out: W,
) -> Result<()> {
    if driving.times().len() != curve.len() {
        return Err(Error::Consistency(format!(
            "driver has {} samples but curve has {} vertices",
            driving.times().len(),
            curve.len()
        )));
    }
    let mut w = writer(out);
    w.write_record(["t", "lambda", "s"])?;
    for ((t, v), s) in driving
        .times()
        .iter()
        .zip(driving.values())
        .zip(curve.arclength())
    {
        w.write_record([num(*t), num(*v), num(*s)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_table<W: Write>(table: &Table, out: W) -> Result<()> {
    let mut w = writer(out);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|x| num(*x)))?;
    }
    w.flush()?;
    Ok(())
}
