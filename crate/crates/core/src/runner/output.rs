//! CSV writers. Floats carry 17 significant digits so values round-trip.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::landscape::ExtremaSet;
use crate::observables::{ObservablesSeries, SnapshotRecord};
use crate::potential::potential_value;
use crate::spectral::SpectrumResult;

pub fn fmt(x: f64) -> String {
    format!("{x:.16e}")
}

/// Create `path` and hand a buffered writer to `body`.
pub fn write_file(
    path: &Path,
    body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| Error::io(path, e))
}

pub fn write_extrema(w: &mut dyn Write, extrema: &ExtremaSet) -> std::io::Result<()> {
    writeln!(w, "index,kind,s,V")?;
    let mut rows: Vec<(&str, f64)> = extrema
        .minima
        .iter()
        .map(|&s| ("min", s))
        .chain(extrema.maxima.iter().map(|&s| ("max", s)))
        .collect();
    rows.sort_by(|a, b| a.1.total_cmp(&b.1));
    for (i, (kind, s)) in rows.into_iter().enumerate() {
        let v = potential_value(&extrema.params, s).unwrap_or(f64::NAN);
        writeln!(w, "{},{kind},{},{}", i + 1, fmt(s), fmt(v))?;
    }
    Ok(())
}

/// `spacing` is the gap to the next level; empty on the last row.
pub fn write_spectrum(w: &mut dyn Write, spectrum: &SpectrumResult) -> std::io::Result<()> {
    writeln!(w, "n,energy,spacing,bound")?;
    for (n, e) in spectrum.eigenvalues.iter().enumerate() {
        let spacing = spectrum
            .spacings
            .get(n)
            .map(|&d| fmt(d))
            .unwrap_or_default();
        writeln!(
            w,
            "{n},{},{spacing},{}",
            fmt(*e),
            u8::from(n < spectrum.bound_count)
        )?;
    }
    Ok(())
}

pub fn write_observables(w: &mut dyn Write, series: &ObservablesSeries) -> std::io::Result<()> {
    write!(w, "t,norm,energy,outside")?;
    for k in 1..=series.n_wells() {
        write!(w, ",iwo_{k},mean_{k},std_{k},valid_{k}")?;
    }
    writeln!(w)?;
    for i in 0..series.len() {
        write!(
            w,
            "{},{},{},{}",
            fmt(series.times[i]),
            fmt(series.norm[i]),
            fmt(series.energy[i]),
            fmt(series.outside[i])
        )?;
        for k in 0..series.n_wells() {
            write!(
                w,
                ",{},{},{},{}",
                fmt(series.iwo[k][i]),
                fmt(series.mean_s[k][i]),
                fmt(series.std_s[k][i]),
                u8::from(series.valid[k][i])
            )?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_snapshot(w: &mut dyn Write, snap: &SnapshotRecord) -> std::io::Result<()> {
    writeln!(w, "# t = {}", fmt(snap.t))?;
    writeln!(w, "s,re,im,abs2")?;
    for i in 0..snap.s.len() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt(snap.s[i]),
            fmt(snap.re[i]),
            fmt(snap.im[i]),
            fmt(snap.abs2[i])
        )?;
    }
    Ok(())
}
