//! Profile CSV: header `bus,kind,t1,...,tN`, one row per (bus, kind) with
//! kind `load` or `gen`. Buses without a row default to zero.

use std::collections::HashSet;
use std::fmt::Write as _;

use super::{BusTimeMatrix, NetError, Network, Profiles, TimeGrid};

/// Number of time columns declared by a profile header.
pub fn profile_header_steps(csv_text: &str) -> Result<usize, NetError> {
    let header = csv_text
        .lines()
        .find(|l| !l.trim().is_empty())
        .ok_or_else(|| profile_err(1, "missing header"))?;
    let cols = header.split(',').count();
    if cols < 3 {
        return Err(profile_err(1, "header needs bus, kind and at least one time column"));
    }
    Ok(cols - 2)
}

pub fn parse_profiles(csv_text: &str, network: &Network, grid: &TimeGrid) -> Result<Profiles, NetError> {
    let positions = network.positions();
    let n = network.bus_count();
    let mut gen = BusTimeMatrix::zeros(n, grid.steps);
    let mut load = BusTimeMatrix::zeros(n, grid.steps);

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| profile_err(1, &e.to_string()))?
        .clone();
    if headers.len() != grid.steps + 2 {
        return Err(profile_err(
            1,
            &format!("header has {} columns, expected {}", headers.len(), grid.steps + 2),
        ));
    }
    if &headers[0] != "bus" || &headers[1] != "kind" {
        return Err(profile_err(1, "header must start with `bus,kind`"));
    }
    for (t, name) in headers.iter().skip(2).enumerate() {
        if name != format!("t{}", t + 1) {
            return Err(profile_err(1, &format!("time column {} must be named t{}", t + 1, t + 1)));
        }
    }

    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            profile_err(line, &e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != grid.steps + 2 {
            return Err(profile_err(
                line,
                &format!("row has {} columns, expected {}", record.len(), grid.steps + 2),
            ));
        }
        let id: u32 = record[0]
            .parse()
            .map_err(|_| profile_err(line, &format!("invalid bus id `{}`", &record[0])))?;
        let pos = *positions.get(&id).ok_or(NetError::UnknownBus(id))?;
        let target = match &record[1] {
            "load" => &mut load,
            "gen" => &mut gen,
            other => return Err(profile_err(line, &format!("unknown kind `{other}`"))),
        };
        if !seen.insert((id, record[1].to_string())) {
            return Err(profile_err(line, &format!("duplicate {} row for bus {id}", &record[1])));
        }
        for (t, field) in record.iter().skip(2).enumerate() {
            let value: f64 = field
                .parse()
                .map_err(|_| profile_err(line, &format!("invalid number `{field}`")))?;
            if value < 0.0 {
                return Err(NetError::NegativeProfile { line, value });
            }
            if !value.is_finite() {
                return Err(profile_err(line, "non-finite profile value"));
            }
            target.set(pos, t, value);
        }
    }
    Ok(Profiles { gen, load })
}

/// Write profiles in the CSV layout accepted by [`parse_profiles`]. All-zero
/// rows are omitted.
pub fn write_profiles(profiles: &Profiles, network: &Network) -> String {
    let steps = profiles.load.steps();
    let mut out = String::from("bus,kind");
    for t in 1..=steps {
        let _ = write!(out, ",t{t}");
    }
    out.push('\n');
    for (pos, bus) in network.buses.iter().enumerate() {
        for (kind, m) in [("load", &profiles.load), ("gen", &profiles.gen)] {
            if m.row(pos).iter().all(|&v| v == 0.0) {
                continue;
            }
            let _ = write!(out, "{},{kind}", bus.id);
            for v in m.row(pos) {
                let _ = write!(out, ",{v:?}");
            }
            out.push('\n');
        }
    }
    out
}

fn profile_err(line: usize, message: &str) -> NetError {
    NetError::Profile {
        line,
        message: message.to_string(),
    }
}
